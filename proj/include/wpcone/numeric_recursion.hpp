#pragma once

// The same recursion assembled numerically: Gap derivatives as kernels,
// x-integrals by quadrature, and the distinguished-slot integral by
// Gauss-Legendre. Sub-volumes are the exact lower polynomials, evaluated in
// floating point. Used to cross-check the symbolic assembly.

#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "wpcone/errors.hpp"
#include "wpcone/kernels.hpp"
#include "wpcone/polyalg.hpp"
#include "wpcone/recursion.hpp"

namespace wpcone {

/// Flattened double-precision copy of a polynomial for fast repeated evaluation.
class CompiledPolynomial {
 public:
  CompiledPolynomial() = default;
  explicit CompiledPolynomial(const VolumePolynomial& p) : n_(p.numVariables()) {
    for (const auto& [m, pc] : p.terms()) {
      std::vector<int> deg(n_);
      for (std::size_t i = 0; i < n_; ++i) deg[i] = m.lengthDegree(i);
      terms_.push_back({std::move(deg), pc.eval(std::numbers::pi)});
    }
  }

  double operator()(std::span<const double> v) const {
    double acc = 0.0;
    for (const auto& [deg, c] : terms_) {
      double mono = c;
      for (std::size_t i = 0; i < n_; ++i)
        for (int k = 0; k < deg[i]; ++k) mono *= v[i];
      acc += mono;
    }
    return acc;
  }

 private:
  struct Term {
    std::vector<int> degrees;
    double coeff;
  };
  std::size_t n_ = 0;
  std::vector<Term> terms_;
};

class NumericRecursion {
 public:
  explicit NumericRecursion(VolumeEngine& engine, double tol = 1e-13) : engine_(engine) {
    quad_.tol = tol;
    quad_.relative = true;
  }

  /// d(t V_raw / 2)/dt at the given slot values (lengths, or angles on cone slots).
  double rhs(const SurfaceSignature& sig, std::size_t d, std::span<const double> values) {
    sig.validate();
    if (values.size() != static_cast<std::size_t>(sig.totalSlots()))
      throw DomainError("expected " + std::to_string(sig.totalSlots()) + " slot values");
    const auto kinds = sig.kinds();
    const Complex gamma = kinds[d] == SlotKind::Length ? Complex(values[d], 0.0) : Complex(0.0, values[d]);

    if (sig.g == 0 && sig.totalSlots() == 3) return 0.5;
    if (sig.g == 1 && sig.totalSlots() == 1) {
      return quadratureOracle([&](double x) { return x * gap::firstDerivative(gamma, 2.0 * x).real(); }, 0.0, quad_)
          .value;
    }

    double total = 0.0;
    struct Product {
      CompiledPolynomial poly;
      std::vector<std::size_t> targets;
    };
    std::vector<std::vector<Product>> doubleTerms;  // each entry: one factor (x,y) or two factors (x),(y)

    for (const auto& t : recursionTerms(sig, d)) {
      using K = RecursionTerm::Kind;
      if (t.kind == K::NonSeparating) {
        auto keep = detail::otherSlots(sig, {d});
        doubleTerms.push_back({{CompiledPolynomial(engine_.directVolume(subSig(sig, sig.g - 1, 2, keep))), keep}});
      } else if (t.kind == K::Separating) {
        auto left = side(sig, t.splitting.I1, t.splitting.J1), right = side(sig, t.splitting.I2, t.splitting.J2);
        doubleTerms.push_back({{CompiledPolynomial(engine_.directVolume(subSig(sig, t.splitting.g1, 1, left))), left},
                               {CompiledPolynomial(engine_.directVolume(subSig(sig, t.splitting.g2, 1, right))), right}});
      } else {
        auto keep = detail::otherSlots(sig, {d, t.partner});
        const CompiledPolynomial v(engine_.directVolume(subSig(sig, sig.g, 1, keep)));
        const BoundaryLabel partner = kinds[t.partner] == SlotKind::Length ? BoundaryLabel::geodesic(values[t.partner])
                                                                           : BoundaryLabel::cone(values[t.partner]);
        const Complex sp = partner.size();
        std::vector<double> args(1 + keep.size());
        for (std::size_t i = 0; i < keep.size(); ++i) args[1 + i] = values[keep[i]];
        total += quadratureOracle(
                     [&](double x) {
                       args[0] = x;
                       // dGap/dl in its cancellation-free form 1/4 [H(x, t + s) + H(x, t - s)]
                       return 0.25 * x * (pairKernel(x, gamma + sp) + pairKernel(x, gamma - sp)).real() * v(args);
                     },
                     0.0, quad_)
                     .value;
      }
    }

    if (!doubleTerms.empty()) {
      std::vector<std::vector<double>> args;
      for (const auto& term : doubleTerms) {
        for (const auto& f : term) {
          std::vector<double> a((term.size() == 1 ? 2 : 1) + f.targets.size());
          for (std::size_t i = 0; i < f.targets.size(); ++i) a[a.size() - f.targets.size() + i] = values[f.targets[i]];
          args.push_back(std::move(a));
        }
      }
      // int int xy S(x, y) ... with x = u v, y = u (1 - v), dx dy = u du dv
      auto inner = [&](double u) {
        auto integrand = [&](double v) {
          const double x = u * v, y = u * (1.0 - v);
          double s = 0.0;
          std::size_t k = 0;
          for (const auto& term : doubleTerms) {
            if (term.size() == 1) {
              auto& a = args[k++];
              a[0] = x;
              a[1] = y;
              s += term[0].poly(a);
            } else {
              auto& a = args[k++];
              auto& b = args[k++];
              a[0] = x;
              b[0] = y;
              s += term[0].poly(a) * term[1].poly(b);
            }
          }
          return x * y * s;
        };
        return u * boost::math::quadrature::gauss<double, 30>::integrate(integrand, 0.0, 1.0);
      };
      total += 0.5 * quadratureOracle([&](double u) { return inner(u) * gap::firstDerivative(gamma, u).real(); }, 0.0,
                                      quad_)
                         .value;
    }
    return total;
  }

  /// Public volume from the numeric right-hand side: V = (2/t) int_0^t rhs.
  double volume(const SurfaceSignature& sig, std::span<const double> values) {
    sig.validate();
    if (sig.totalSlots() == 0) throw DomainError("numeric recursion needs at least one boundary or cone slot");
    const std::size_t d = engine_.defaultSlot(sig);
    const double t = values[d];
    if (!(t > 0.0)) throw DomainError("distinguished slot value must be positive");
    std::vector<double> point(values.begin(), values.end());
    const double integral = boost::math::quadrature::gauss<double, 20>::integrate(
        [&](double tau) {
          point[d] = tau;
          return rhs(sig, d, point);
        },
        0.0, t);
    const double raw = 2.0 * integral / t;
    return oneHandleExponent(sig) ? raw / 2.0 : raw;
  }

 private:
  static SurfaceSignature subSig(const SurfaceSignature& sig, int g, int integrated, const std::vector<std::size_t>& keep) {
    int lengths = integrated, cones = 0;
    for (std::size_t s : keep) (static_cast<int>(s) < sig.m ? lengths : cones)++;
    return {g, lengths, cones};
  }

  static std::vector<std::size_t> side(const SurfaceSignature& sig, const std::vector<int>& I, const std::vector<int>& J) {
    std::vector<std::size_t> out(I.begin(), I.end());
    for (int j : J) out.push_back(static_cast<std::size_t>(sig.m + j));
    return out;
  }

  VolumeEngine& engine_;
  QuadratureOptions quad_;
};

}  // namespace wpcone
