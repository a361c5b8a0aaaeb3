#pragma once

// Simple closed geodesics on a one-holed (or one-cone, or once-punctured) torus
// from the Fricke trace tree, and the McShane-type sums over them.
//
// A marked torus group has traces (x, y, z) = (tr A, tr B, tr AB) with
//   x^2 + y^2 + z^2 - xyz = kappa,
// kappa = 2 - 2 cos(theta/2) for a cone point of angle theta,
// kappa = 2 - 2 cosh(l/2) for a geodesic boundary of length l, 0 for a cusp.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <array>
#include <future>
#include <iomanip>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "json.hpp"

#include "wpcone/errors.hpp"
#include "wpcone/kernels.hpp"

namespace wpcone {

/// Reduced fraction p/q with q >= 0 (1/0 is the slope at infinity).
struct Slope {
  std::int64_t p = 0;
  std::int64_t q = 1;

  static Slope make(std::int64_t p, std::int64_t q) {
    if (q < 0 || (q == 0 && p < 0)) p = -p, q = -q;
    const std::int64_t g = std::gcd(p, q);
    return g ? Slope{p / g, q / g} : Slope{p, q};
  }
  std::string str() const { return std::to_string(p) + "/" + std::to_string(q); }
  friend bool operator==(const Slope&, const Slope&) = default;
  friend bool operator<(const Slope& a, const Slope& b) {
    return static_cast<__int128>(a.p) * b.q < static_cast<__int128>(b.p) * a.q;
  }
};

struct TraceTriple {
  long double x = 3, y = 3, z = 3;
  int level = 0;
  Slope sx{0, 1}, sy{1, 0}, sz{1, 1};

  long double fricke() const { return x * x + y * y + z * z - x * y * z; }
};

inline double kappaForCone(double theta) {
  requireAngle(theta);
  return 2.0 - 2.0 * std::cos(theta / 2.0);
}
inline double kappaForBoundary(double length) {
  requirePositive(length, "boundary length");
  return 2.0 - 2.0 * std::cosh(length / 2.0);
}
inline double kappaFor(const BoundaryLabel& b) {
  switch (b.kind) {
    case BoundaryLabel::Kind::Cone: return kappaForCone(b.value);
    case BoundaryLabel::Kind::Geodesic: return kappaForBoundary(b.value);
    case BoundaryLabel::Kind::Cusp: break;
  }
  return 0.0;
}

/// z > 2 completing (x, y, z) to the kappa surface; the larger root of z^2 - xyz + x^2 + y^2 - kappa = 0.
inline TraceTriple projectToKappa(long double x, long double y, double kappa) {
  const long double disc = x * x * y * y - 4 * (x * x + y * y - kappa);
  if (!(disc >= 0)) throw DomainError("no real trace triple through (x, y) on the given Fricke surface");
  TraceTriple t;
  t.x = x;
  t.y = y;
  t.z = (x * y + std::sqrt(disc)) / 2;
  if (!(x > 2 && y > 2 && t.z > 2)) throw DomainError("trace triple must have all traces above 2");
  return t;
}

/// Symmetric point x = y = z = t, t > 2, of 3t^2 - t^3 = kappa; otherwise (3, 3, *) projected.
inline TraceTriple rootTriple(double kappa, bool symmetricStart = true) {
  if (!(kappa < 4.0) || !std::isfinite(kappa))
    throw DomainError("Fricke constant must be below 4 for a hyperbolic torus, got " + std::to_string(kappa));
  if (!symmetricStart) {
    const long double x = 3.0L + 0.1L, y = 3.0L + std::max(0.0L, -static_cast<long double>(kappa)) / 4;
    return projectToKappa(x, y, kappa);
  }
  auto f = [kappa](long double t) { return 3 * t * t - t * t * t - kappa; };
  long double hi = 3.0L + std::cbrt(std::abs(static_cast<long double>(kappa))) + 1.0L;
  std::uintmax_t iters = 200;
  auto [lo, up] = boost::math::tools::toms748_solve(f, 2.0L, hi, f(2.0L), f(hi),
                                                    boost::math::tools::eps_tolerance<long double>(62), iters);
  const long double t = (lo + up) / 2;
  if (!(t > 2)) throw DomainError("no trace root above 2 for kappa = " + std::to_string(kappa));
  TraceTriple r;
  r.x = r.y = r.z = t;
  return r;
}

/// Move to the reduced triple (no coordinate can be lowered by a tree move), keeping slopes attached.
inline TraceTriple reduceRoot(TraceTriple t) {
  for (int guard = 0; guard < 10000; ++guard) {
    long double* c[3] = {&t.x, &t.y, &t.z};
    Slope* s[3] = {&t.sx, &t.sy, &t.sz};
    const int big = static_cast<int>(std::max_element(c, c + 3, [](auto a, auto b) { return *a < *b; }) - c);
    const int i = (big + 1) % 3, j = (big + 2) % 3;
    const long double other = *c[i] * *c[j] - *c[big];
    if (!(other < *c[big])) return t;
    *c[big] = other;
    const Slope plus = Slope::make(s[i]->p + s[j]->p, s[i]->q + s[j]->q);
    const Slope minus = Slope::make(s[i]->p - s[j]->p, s[i]->q - s[j]->q);
    *s[big] = (*s[big] == plus) ? minus : plus;
  }
  throw InvariantError("trace triple reduction did not terminate");
}

inline double geodesicLength(long double trace) {
  if (!(trace > 2)) throw InvariantError("non-hyperbolic trace " + std::to_string(static_cast<double>(trace)) + " in tree");
  return static_cast<double>(2 * std::acosh(trace / 2));
}

struct Geodesic {
  Slope slope;
  long double trace = 0;
  double length = 0;
  int level = 0;
};

namespace detail {

struct Region {
  long double trace;
  Slope slope;
};

// d = ab - c across the edge between a and b; the new region sits opposite c.
template <class Emit>
void exploreTree(const Region& a, const Region& b, const Region& c, int level, long double traceCutoff, int maxLevel,
                 Emit& emit) {
  const long double d = a.trace * b.trace - c.trace;
  if (d > traceCutoff || level > maxLevel) return;
  const Slope plus = Slope::make(a.slope.p + b.slope.p, a.slope.q + b.slope.q);
  const Slope minus = Slope::make(a.slope.p - b.slope.p, a.slope.q - b.slope.q);
  const Region r{d, c.slope == plus ? minus : plus};
  emit(r, level, a, b);
  exploreTree(a, r, b, level + 1, traceCutoff, maxLevel, emit);
  exploreTree(r, b, a, level + 1, traceCutoff, maxLevel, emit);
}

}  // namespace detail

struct EnumerationOptions {
  int maxLevel = 1 << 20;  // unpruned depth bound (set small with an infinite cutoff)
  unsigned threads = 1;
};

/// All simple closed geodesics with length <= lengthCutoff, sorted by (length, slope).
inline std::vector<Geodesic> enumerateGeodesics(const TraceTriple& start, double lengthCutoff,
                                                const EnumerationOptions& opt = {}) {
  const TraceTriple root = reduceRoot(start);
  const long double cutoff =
      std::isinf(lengthCutoff) ? std::numeric_limits<long double>::infinity() : 2 * std::cosh(static_cast<long double>(lengthCutoff) / 2);
  const detail::Region rx{root.x, root.sx}, ry{root.y, root.sy}, rz{root.z, root.sz};
  std::vector<Geodesic> out;
  for (const auto& r : {rx, ry, rz})
    if (r.trace <= cutoff) out.push_back({r.slope, r.trace, geodesicLength(r.trace), 0});

  auto branch = [&](const detail::Region& a, const detail::Region& b, const detail::Region& c) {
    std::vector<Geodesic> part;
    auto emit = [&](const detail::Region& r, int level, const detail::Region&, const detail::Region&) {
      part.push_back({r.slope, r.trace, geodesicLength(r.trace), level});
    };
    detail::exploreTree(a, b, c, 1, cutoff, opt.maxLevel, emit);
    return part;
  };
  const std::array<std::array<detail::Region, 3>, 3> roots{{{rx, ry, rz}, {ry, rz, rx}, {rz, rx, ry}}};
  std::vector<std::vector<Geodesic>> parts(3);
  if (opt.threads > 1) {
    std::vector<std::future<std::vector<Geodesic>>> jobs;
    for (const auto& r : roots) jobs.push_back(std::async(std::launch::async, branch, r[0], r[1], r[2]));
    for (std::size_t i = 0; i < 3; ++i) parts[i] = jobs[i].get();
  } else {
    for (std::size_t i = 0; i < 3; ++i) parts[i] = branch(roots[i][0], roots[i][1], roots[i][2]);
  }
  for (auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  std::sort(out.begin(), out.end(), [](const Geodesic& a, const Geodesic& b) {
    if (a.trace != b.trace) return a.trace < b.trace;
    return a.slope < b.slope;
  });
  return out;
}

/// Every triple reached by tree moves to `depth`, unpruned (for checking the pruning rule).
inline std::vector<TraceTriple> enumerateTriples(const TraceTriple& start, int depth) {
  const TraceTriple root = reduceRoot(start);
  std::vector<TraceTriple> out{root};
  const detail::Region rx{root.x, root.sx}, ry{root.y, root.sy}, rz{root.z, root.sz};
  auto emit = [&](const detail::Region& r, int level, const detail::Region& a, const detail::Region& b) {
    out.push_back(TraceTriple{a.trace, b.trace, r.trace, level, a.slope, b.slope, r.slope});
  };
  const long double inf = std::numeric_limits<long double>::infinity();
  detail::exploreTree(rx, ry, rz, 1, inf, depth, emit);
  detail::exploreTree(ry, rz, rx, 1, inf, depth, emit);
  detail::exploreTree(rz, rx, ry, 1, inf, depth, emit);
  return out;
}

/// Summand for one geodesic of length l on the torus whose hole is `hole` (alpha = beta = l).
inline long double mcshaneSummand(const BoundaryLabel& hole, long double l) {
  switch (hole.kind) {
    case BoundaryLabel::Kind::Cone: {
      const long double h = static_cast<long double>(hole.value) / 2;
      return 2 * std::atan(std::sin(h) / (std::cos(h) + std::exp(l)));
    }
    case BoundaryLabel::Kind::Geodesic: {
      const long double h = static_cast<long double>(hole.value) / 2;
      return 2 * std::atanh(std::sinh(h) / (std::cosh(h) + std::exp(l)));
    }
    case BoundaryLabel::Kind::Cusp: break;
  }
  return 1 / (1 + std::exp(l));
}

inline long double mcshaneTarget(const BoundaryLabel& hole) {
  return hole.kind == BoundaryLabel::Kind::Cusp ? 0.5L : static_cast<long double>(hole.value) / 2;
}

struct PartialSum {
  double cutoff = 0;
  std::size_t count = 0;
  long double sum = 0;
  long double residual = 0;
};

struct ConvergenceReport {
  std::string hole;
  long double target = 0;
  std::vector<PartialSum> partialSums;
  std::size_t geodesicCount = 0;

  long double finalResidual() const { return partialSums.empty() ? target : partialSums.back().residual; }

  nlohmann::json toJson() const {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& p : partialSums)
      rows.push_back({{"cutoff", p.cutoff},
                      {"count", p.count},
                      {"sum", static_cast<double>(p.sum)},
                      {"residual", static_cast<double>(p.residual)}});
    return {{"hole", hole},
            {"target", static_cast<double>(target)},
            {"geodesicCount", geodesicCount},
            {"partialSums", rows},
            {"finalResidual", static_cast<double>(finalResidual())}};
  }

  std::string toTable() const {
    std::ostringstream out;
    out << "# " << hole << ", target " << std::setprecision(17) << static_cast<double>(target) << "\n";
    out << "cutoff  count  sum  residual\n";
    for (const auto& p : partialSums)
      out << p.cutoff << "  " << p.count << "  " << std::setprecision(17) << static_cast<double>(p.sum) << "  "
          << std::setprecision(6) << static_cast<double>(p.residual) << "\n";
    return out.str();
  }
};

inline std::string describe(const BoundaryLabel& hole) {
  std::ostringstream s;
  s << std::setprecision(17);
  switch (hole.kind) {
    case BoundaryLabel::Kind::Cone: s << "cone angle " << hole.value; break;
    case BoundaryLabel::Kind::Geodesic: s << "boundary length " << hole.value; break;
    case BoundaryLabel::Kind::Cusp: s << "cusp"; break;
  }
  return s.str();
}

/// Partial sums over geodesics of length <= each cutoff (cutoffs ascending), compensated in long double.
inline ConvergenceReport mcshaneSum(const TraceTriple& root, const BoundaryLabel& hole, std::vector<double> cutoffs,
                                    const EnumerationOptions& opt = {}) {
  if (cutoffs.empty()) throw DomainError("at least one length cutoff is required");
  std::sort(cutoffs.begin(), cutoffs.end());
  const double kappa = kappaFor(hole);
  if (std::abs(static_cast<double>(root.fricke()) - kappa) > 1e-9 * std::max(1.0, std::abs(kappa)))
    throw DomainError("trace triple does not lie on the Fricke surface of the " + describe(hole));
  const auto geodesics = enumerateGeodesics(root, cutoffs.back(), opt);
  if (geodesics.empty()) throw DomainError("length cutoff is below the systole; no geodesics enumerated");

  ConvergenceReport rep;
  rep.hole = describe(hole);
  rep.target = mcshaneTarget(hole);
  rep.geodesicCount = geodesics.size();
  long double sum = 0, comp = 0;  // Neumaier summation
  std::size_t i = 0;
  for (double c : cutoffs) {
    for (; i < geodesics.size() && geodesics[i].length <= c; ++i) {
      const long double term = mcshaneSummand(hole, geodesics[i].length);
      const long double t = sum + term;
      comp += std::abs(sum) >= std::abs(term) ? (sum - t) + term : (term - t) + sum;
      sum = t;
    }
    rep.partialSums.push_back({c, i, sum + comp, std::abs(rep.target - (sum + comp))});
  }
  return rep;
}

inline ConvergenceReport mcshaneSum(const BoundaryLabel& hole, std::vector<double> cutoffs,
                                    const EnumerationOptions& opt = {}) {
  return mcshaneSum(rootTriple(kappaFor(hole)), hole, std::move(cutoffs), opt);
}

/// (1/theta) int_0^inf x D(theta, x, x) dx, an estimate of the one-cone torus volume.
inline double integrateVolumeIdentity(double theta, double tailCutoff = 4000.0, double tol = 1e-12) {
  requireAngle(theta);
  QuadratureOptions opt;
  opt.tol = tol;
  opt.relative = true;
  opt.maxCutoff = tailCutoff;
  const auto res = quadratureOracle([theta](double x) { return x > 0.0 ? x * coneTorusKernelD(theta, x) : 0.0; }, 0.0, opt);
  return res.value / theta;
}

}  // namespace wpcone
