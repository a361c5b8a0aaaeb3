#pragma once

// Cone-surface volumes: angle validation, the l = i*theta substitution, and
// numeric evaluation with a positivity check.

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "wpcone/errors.hpp"
#include "wpcone/polyalg.hpp"
#include "wpcone/recursion.hpp"

namespace wpcone {

inline void validateConeAngle(double theta) {
  if (std::isnan(theta) || theta <= 0.0)
    throw DomainError("cone angle must lie in (0, pi], got " + std::to_string(theta));
  if (theta > std::numbers::pi)
    throw DomainError("cone angle must lie in (0, pi], got " + std::to_string(theta) +
                      ": beyond pi a pants decomposition of the cone surface may not exist");
}

struct ConeSurfaceSpec {
  SurfaceSignature sig;
  std::optional<std::vector<double>> boundaryLengths;  // symbolic when absent
  std::vector<double> coneAngles;                       // empty (symbolic) or one per cone point

  void validate() const {
    sig.validate();
    if (boundaryLengths) {
      if (boundaryLengths->size() != static_cast<std::size_t>(sig.m))
        throw DomainError("expected " + std::to_string(sig.m) + " boundary lengths, got " +
                          std::to_string(boundaryLengths->size()));
      for (double l : *boundaryLengths)
        if (!(l >= 0.0) || !std::isfinite(l))
          throw DomainError("boundary length must be a non-negative finite number, got " + std::to_string(l));
    }
    if (!coneAngles.empty() && coneAngles.size() != static_cast<std::size_t>(sig.n))
      throw DomainError("expected " + std::to_string(sig.n) + " cone angles, got " + std::to_string(coneAngles.size()));
    for (double a : coneAngles) validateConeAngle(a);
  }
};

/// Exact polynomial over m length slots followed by n angle slots.
inline VolumePolynomial volumePolynomial(VolumeEngine& engine, const ConeSurfaceSpec& spec) {
  spec.validate();
  auto v = engine.computeVolume(spec.sig);
  if (!v.isEven()) throw InvariantError("cone volume " + spec.sig.str() + " kept an odd power after substitution");
  return v;
}

inline double volumeValue(VolumeEngine& engine, const ConeSurfaceSpec& spec) {
  spec.validate();
  if (spec.sig.m > 0 && !spec.boundaryLengths) throw DomainError("numeric evaluation needs boundary lengths");
  if (spec.sig.n > 0 && spec.coneAngles.empty()) throw DomainError("numeric evaluation needs cone angles");
  // Gauss-Bonnet: area 2pi(2g-2+m+n) - sum(theta) must be positive for the surface to exist.
  double area = 2.0 * std::numbers::pi * (2 * spec.sig.g - 2 + spec.sig.m + spec.sig.n);
  for (double a : spec.coneAngles) area -= a;
  if (!(area > 0.0))
    throw DomainError("cone angles leave no hyperbolic area for " + spec.sig.str() + " (area " + std::to_string(area) +
                      "); no such cone surface exists");
  std::vector<double> point = spec.boundaryLengths.value_or(std::vector<double>{});
  point.insert(point.end(), spec.coneAngles.begin(), spec.coneAngles.end());
  const double v = volumePolynomial(engine, spec).evalNumeric(point, std::numbers::pi);
  if (!(v > 0.0))
    throw InvariantError("volume " + spec.sig.str() + " evaluated to a non-positive value " + std::to_string(v));
  return v;
}

/// The volume with cone `coneIndex` (0-based among cones) sent to angle 0, i.e. a cusp.
inline VolumePolynomial cuspLimitCheck(VolumeEngine& engine, const SurfaceSignature& sig, std::size_t coneIndex) {
  sig.validate();
  if (coneIndex >= static_cast<std::size_t>(sig.n))
    throw DomainError("cone index " + std::to_string(coneIndex) + " out of range for signature " + sig.str());
  return engine.computeVolume(sig).atZero(static_cast<std::size_t>(sig.m) + coneIndex);
}

}  // namespace wpcone
