#pragma once

// Gap functions of the generalized McShane identity, the one-cone torus
// kernel D(theta, x, x), and the moment transforms that turn the recursion's
// x-integrals into exact polynomials.
//
// Convention: a geodesic boundary gamma has |gamma| = L, a cone point of angle
// theta has |gamma| = i*theta. All Gap formulas are evaluated analytically in
// |gamma| (complex), so Gap(i*theta) = i * (real cone gap).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <mutex>
#include <numbers>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "wpcone/errors.hpp"
#include "wpcone/polyalg.hpp"

namespace wpcone {

using Complex = std::complex<double>;

struct BoundaryLabel {
  enum class Kind { Geodesic, Cone, Cusp };
  Kind kind = Kind::Cusp;
  double value = 0.0;  // length for Geodesic, angle for Cone

  static BoundaryLabel geodesic(double length) {
    if (!(length > 0.0) || !std::isfinite(length))
      throw DomainError("geodesic length must be positive, got " + std::to_string(length));
    return {Kind::Geodesic, length};
  }
  static BoundaryLabel cone(double angle) {
    if (!(angle > 0.0) || angle > std::numbers::pi)
      throw DomainError("cone angle must lie in (0, pi], got " + std::to_string(angle));
    return {Kind::Cone, angle};
  }
  static BoundaryLabel cusp() { return {Kind::Cusp, 0.0}; }

  /// |gamma|: L for a geodesic, i*theta for a cone point, 0 for a cusp.
  Complex size() const {
    switch (kind) {
      case Kind::Geodesic: return {value, 0.0};
      case Kind::Cone: return {0.0, value};
      case Kind::Cusp: break;
    }
    return {0.0, 0.0};
  }
};

enum class GapCase { Gap1, Gap2, Gap3, Gap4 };

/// gamma is the distinguished boundary/cone; alpha, beta bound a pair of pants with it.
struct GapKernel {
  GapCase gapCase = GapCase::Gap1;
  BoundaryLabel gamma;
  BoundaryLabel alpha;
  BoundaryLabel beta;

  void validate() const {
    using K = BoundaryLabel::Kind;
    if (gamma.kind == K::Cusp) throw DomainError("gap kernel: gamma must be a geodesic boundary or a cone point");
    if (beta.kind != K::Geodesic) throw DomainError("gap kernel: beta must be an interior geodesic");
    switch (gapCase) {
      case GapCase::Gap1:
        if (alpha.kind != K::Geodesic) throw DomainError("Gap1: alpha must be an interior geodesic");
        break;
      case GapCase::Gap2:
        if (alpha.kind != K::Geodesic) throw DomainError("Gap2: alpha must be a boundary geodesic");
        break;
      case GapCase::Gap3:
        if (alpha.kind != K::Cone) throw DomainError("Gap3: alpha must be a cone point");
        break;
      case GapCase::Gap4:
        if (alpha.kind != K::Cusp) throw DomainError("Gap4: alpha must be a cusp");
        break;
    }
  }
};

namespace gap {

// Raw analytic forms. `gamma` is |gamma| (complex); `sumAB` is |alpha| + |beta|;
// `coshHalfAlpha` is cosh(|alpha|/2), i.e. cosh(a/2), cos(phi/2) or 1.

inline Complex first(Complex gamma, double sumAB) {
  const Complex s = std::sinh(gamma / 2.0), c = std::cosh(gamma / 2.0);
  return 2.0 * std::atanh(s / (c + std::exp(sumAB / 2.0)));
}

inline Complex firstDerivative(Complex gamma, double sumAB) {
  const double e = std::exp(sumAB / 2.0);
  const Complex s = std::sinh(gamma / 2.0), c = std::cosh(gamma / 2.0);
  const Complex den = c + e;
  const Complex z = s / den;
  const Complex dz = 0.5 * (1.0 + e * c) / (den * den);
  return 2.0 * dz / (1.0 - z * z);
}

inline Complex paired(Complex gamma, double coshHalfAlpha, double beta) {
  const Complex s = std::sinh(gamma / 2.0), c = std::cosh(gamma / 2.0);
  const double sb = std::sinh(beta / 2.0), cb = std::cosh(beta / 2.0);
  return gamma / 2.0 - std::atanh(s * sb / (coshHalfAlpha + c * cb));
}

inline Complex pairedDerivative(Complex gamma, double coshHalfAlpha, double beta) {
  const Complex s = std::sinh(gamma / 2.0), c = std::cosh(gamma / 2.0);
  const double sb = std::sinh(beta / 2.0), cb = std::cosh(beta / 2.0);
  const Complex den = coshHalfAlpha + c * cb;
  const Complex w = s * sb / den;
  const Complex dw = 0.5 * sb * (coshHalfAlpha * c + cb) / (den * den);
  return 0.5 - dw / (1.0 - w * w);
}

inline double coshHalf(const BoundaryLabel& a) {
  switch (a.kind) {
    case BoundaryLabel::Kind::Geodesic: return std::cosh(a.value / 2.0);
    case BoundaryLabel::Kind::Cone: return std::cos(a.value / 2.0);
    case BoundaryLabel::Kind::Cusp: break;
  }
  return 1.0;
}

}  // namespace gap

/// Gap value at |gamma| (L or i*theta).
inline Complex gapEval(const GapKernel& k) {
  k.validate();
  const Complex g = k.gamma.size();
  if (k.gapCase == GapCase::Gap1) return gap::first(g, k.alpha.value + k.beta.value);
  return gap::paired(g, gap::coshHalf(k.alpha), k.beta.value);
}

/// d Gap / d|gamma| at |gamma|. For a cone gamma this is d/dtheta of the real cone gap.
inline Complex gapDerivative(const GapKernel& k) {
  k.validate();
  const Complex g = k.gamma.size();
  if (k.gapCase == GapCase::Gap1) return gap::firstDerivative(g, k.alpha.value + k.beta.value);
  return gap::pairedDerivative(g, gap::coshHalf(k.alpha), k.beta.value);
}

/// Real tan-branch value for a cone gamma of angle theta (the form summed to theta/2).
inline double coneGap(GapCase c, double theta, const BoundaryLabel& alpha, const BoundaryLabel& beta) {
  GapKernel{c, BoundaryLabel::cone(theta), alpha, beta}.validate();
  const double s = std::sin(theta / 2.0), co = std::cos(theta / 2.0);
  if (c == GapCase::Gap1) return 2.0 * std::atan(s / (co + std::exp((alpha.value + beta.value) / 2.0)));
  const double sb = std::sinh(beta.value / 2.0), cb = std::cosh(beta.value / 2.0);
  return theta / 2.0 - std::atan(s * sb / (gap::coshHalf(alpha) + co * cb));
}

/// Real tanh-branch value for a geodesic boundary gamma of length L (summed to L/2).
inline double boundaryGap(GapCase c, double length, const BoundaryLabel& alpha, const BoundaryLabel& beta) {
  GapKernel{c, BoundaryLabel::geodesic(length), alpha, beta}.validate();
  const double s = std::sinh(length / 2.0), co = std::cosh(length / 2.0);
  if (c == GapCase::Gap1) return 2.0 * std::atanh(s / (co + std::exp((alpha.value + beta.value) / 2.0)));
  const double sb = std::sinh(beta.value / 2.0), cb = std::cosh(beta.value / 2.0);
  return length / 2.0 - std::atanh(s * sb / (gap::coshHalf(alpha) + co * cb));
}

// ---------------------------------------------------------------------------
// One-cone torus kernel

enum class KernelNormalization {
  HalfAngle,  // sum over simple closed geodesics = theta/2; theta*V_{1,0,1} = int x D dx
  FullAngle,  // twice the above, sum = theta
};

inline void requireAngle(double theta) {
  if (!(theta > 0.0) || theta > std::numbers::pi)
    throw DomainError("cone angle must lie in (0, pi], got " + std::to_string(theta));
}
inline void requirePositive(double x, const char* what) {
  if (!(x > 0.0) || !std::isfinite(x)) throw DomainError(std::string(what) + " must be positive");
}

/// D(theta, x, x) = 2 atan( sin(theta/2) / (cos(theta/2) + e^x) ).
inline double coneTorusKernelD(double theta, double x, KernelNormalization norm = KernelNormalization::HalfAngle) {
  requireAngle(theta);
  requirePositive(x, "geodesic length");
  const double d = 2.0 * std::atan2(std::sin(theta / 2.0), std::cos(theta / 2.0) + std::exp(x));
  return norm == KernelNormalization::HalfAngle ? d : 2.0 * d;
}

/// Same kernel through (1/i) ln((e^{i theta/2} + e^x) / (e^{-i theta/2} + e^x)).
inline double coneTorusKernelDLog(double theta, double x) {
  requireAngle(theta);
  requirePositive(x, "geodesic length");
  const Complex i(0.0, 1.0);
  const Complex ex(std::exp(x), 0.0);
  const Complex v = std::log((std::exp(i * theta / 2.0) + ex) / (std::exp(-i * theta / 2.0) + ex)) / i;
  return v.real();
}

/// 1/(1+e^z). Near Re z = 0 the tanh form keeps the real part at exactly 1/2 on the imaginary
/// axis, where 1 + e^z can nearly cancel; elsewhere the exponential form keeps relative accuracy.
inline Complex fermiFactor(Complex z) {
  if (z.real() > 1.0) {
    const Complex e = std::exp(-z);
    return e / (1.0 + e);
  }
  if (z.real() < -1.0) return 1.0 / (1.0 + std::exp(z));
  return 0.5 * (1.0 - std::tanh(z / 2.0));
}

/// 1/(1+e^{x - i theta/2}) + 1/(1+e^{x + i theta/2}), unreduced (imaginary part is rounding only).
inline Complex kernelDerivativeHComplex(double theta, double x) {
  const Complex i(0.0, 1.0);
  return fermiFactor(x - i * theta / 2.0) + fermiFactor(x + i * theta / 2.0);
}

/// 2 dD(theta,x,x)/dtheta; real.
inline double kernelDerivativeH(double theta, double x) {
  requireAngle(theta);
  requirePositive(x, "geodesic length");
  return kernelDerivativeHComplex(theta, x).real();
}

/// Mirzakhani's kernel 1/(1+e^{(x+t)/2}) + 1/(1+e^{(x-t)/2}) at complex t.
inline Complex pairKernel(double x, Complex t) {
  return fermiFactor((x + t) / 2.0) + fermiFactor((x - t) / 2.0);
}

// ---------------------------------------------------------------------------
// Exact moment transforms

/// B_0 .. B_n (B_1 = -1/2).
inline std::vector<Rational> bernoulliNumbers(int n) {
  std::vector<Rational> b(n + 1);
  b[0] = 1;
  for (int m = 1; m <= n; ++m) {
    Rational acc = 0;
    BigInt binom = 1;  // C(m+1, j)
    for (int j = 0; j < m; ++j) {
      acc += Rational(binom) * b[j];
      binom = binom * (m + 1 - j) / (j + 1);
    }
    b[m] = -acc / Rational(m + 1);
  }
  return b;
}

inline BigInt factorial(int n) {
  BigInt f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

/// Coefficients c_j (as rational * pi^{2i}) with
///   int_0^inf x^{2k+1} (1/(1+e^{(x+t)/2}) + 1/(1+e^{(x-t)/2})) dx = sum_j c_j t^{2j}.
/// Closed form: (2k+1)! sum_i zeta(2i) (2^{2i+1} - 4) t^{2k+2-2i} / (2k+2-2i)!.
class MomentTable {
 public:
  static constexpr int kDefaultMaxK = 12;

  explicit MomentTable(int maxK = kDefaultMaxK) : maxK_(maxK) {
    if (maxK < 0) throw DomainError("moment table size must be non-negative");
    const auto bern = bernoulliNumbers(2 * maxK + 2);
    rows_.resize(maxK + 1);
    for (int k = 0; k <= maxK; ++k) {
      auto& row = rows_[k];
      row.resize(k + 2);
      const BigInt top = factorial(2 * k + 1);
      for (int i = 0; i <= k + 1; ++i) {
        const int j = k + 1 - i;
        // zeta(2i) = (-1)^{i+1} B_{2i} (2 pi)^{2i} / (2 (2i)!)
        Rational zetaRational = Rational(i % 2 ? 1 : -1) * bern[2 * i] * Rational(BigInt(1) << (2 * i)) /
                                Rational(2 * factorial(2 * i));
        const Rational factor = Rational((BigInt(1) << (2 * i + 1)) - 4);
        const Rational c = Rational(top) * zetaRational * factor / Rational(factorial(2 * j));
        row[j] = PiCoefficient(2 * i, c);
      }
    }
  }

  int maxK() const { return maxK_; }

  const std::vector<PiCoefficient>& coefficients(int k) const {
    if (k < 0 || k > maxK_)
      throw DomainError("moment index k=" + std::to_string(k) + " exceeds configured maximum " + std::to_string(maxK_));
    return rows_[k];
  }

 private:
  int maxK_;
  std::vector<std::vector<PiCoefficient>> rows_;
};

/// F_{2k+1}(t) as a one-slot polynomial in t^2. A length slot reads t = l; an
/// angle slot reads t = i*theta (so t^2 = -theta^2).
inline VolumePolynomial momentIntegralF(int k, SlotKind slot = SlotKind::Length, const MomentTable& table = MomentTable{}) {
  const auto& row = table.coefficients(k);
  VolumePolynomial p(std::vector<SlotKind>{SlotKind::Length});
  for (std::size_t j = 0; j < row.size(); ++j) p.addTerms(Monomial{{static_cast<int>(j)}, 0}, row[j]);
  return slot == SlotKind::Length ? p : p.substituteImaginary(0);
}

/// Evaluate F_{2k+1}(t) for complex t (t = l or t = i*theta) from the exact table.
inline Complex momentIntegralValue(int k, Complex t, const MomentTable& table) {
  const auto& row = table.coefficients(k);
  Complex acc = 0.0, t2 = t * t, pw = 1.0;
  for (const auto& c : row) {
    acc += c.eval(std::numbers::pi) * pw;
    pw *= t2;
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Quadrature oracle

struct QuadratureOptions {
  double tol = 1e-10;
  bool relative = false;     // error budget tol * max(1, |I|)
  double decayRate = 0.5;    // assumed e^{-r x} envelope on the tail
  double panelWidth = 4.0;
  double maxCutoff = 4000.0;
  unsigned maxDepth = 20;
};

struct QuadratureResult {
  double value = 0.0;
  double errorEstimate = 0.0;
  double cutoff = 0.0;
  double tailBound = 0.0;
};

namespace detail {

// One G7/K15 panel on [a, b]; err gets |K15 - G7| scaled to the panel.
template <class F>
double gaussKronrodPanel(F& f, double a, double b, double& err) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  using G = boost::math::quadrature::gauss<double, 7>;
  const auto& x = GK::abscissa();
  const auto& wk = GK::weights();
  const auto& wg = G::weights();
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  const double f0 = f(mid);
  double k = f0 * wk[0], g = f0 * wg[0];
  for (std::size_t i = 1; i < x.size(); ++i) {
    const double pair = f(mid + half * x[i]) + f(mid - half * x[i]);
    k += pair * wk[i];
    if (i % 2 == 0) g += pair * wg[i / 2];
  }
  err = std::abs(k - g) * half;
  return k * half;
}

template <class F>
double adaptiveGaussKronrod(F& f, double a, double b, double tol, unsigned depth, double& errSum) {
  double err = 0.0;
  const double v = gaussKronrodPanel(f, a, b, err);
  if (err <= tol || depth == 0) {
    errSum += err;
    return v;
  }
  const double m = 0.5 * (a + b);
  return adaptiveGaussKronrod(f, a, m, tol / 2, depth - 1, errSum) +
         adaptiveGaussKronrod(f, m, b, tol / 2, depth - 1, errSum);
}

}  // namespace detail

/// Adaptive Gauss-Kronrod (G7/K15 bisection) on [a, b] with an absolute error budget.
template <class F>
QuadratureResult integrateFinite(F&& f, double a, double b, const QuadratureOptions& opt = {}) {
  QuadratureResult res;
  res.cutoff = b;
  if (b <= a) return res;
  const int panels = std::max(1, static_cast<int>(std::ceil((b - a) / opt.panelWidth)));
  const double h = (b - a) / panels;
  double budget = opt.tol;
  if (opt.relative) {
    double coarse = 0.0, e = 0.0;
    for (int p = 0; p < panels; ++p) coarse += detail::gaussKronrodPanel(f, a + p * h, a + (p + 1) * h, e);
    budget = opt.tol * std::max(1.0, std::abs(coarse));
  }
  // Half the budget goes to the adaptive target; the rest absorbs estimator slack.
  const double perPanel = 0.5 * budget / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h, hi = (p + 1 == panels) ? b : a + (p + 1) * h;
    res.value += detail::adaptiveGaussKronrod(f, lo, hi, perPanel, opt.maxDepth, res.errorEstimate);
  }
  if (!(res.errorEstimate <= budget))
    throw ConvergenceError("quadrature did not reach tolerance " + std::to_string(budget) + " (estimate " +
                           std::to_string(res.errorEstimate) + ")");
  return res;
}

/// int_a^inf f, truncated at X where the exponential tail estimate |f(X)|/r_eff is below tol/10.
/// r_eff is measured from two samples one panel apart and must show at least a
/// quarter of the assumed decay rate before the estimate is trusted.
template <class F>
QuadratureResult quadratureOracle(F&& f, double a, const QuadratureOptions& opt = {}) {
  double x = a;
  double tail = std::numeric_limits<double>::infinity();
  double scale = 1.0;
  bool found = false;
  for (; x <= opt.maxCutoff; x += opt.panelWidth) {
    const double f0 = std::abs(f(x)), f1 = std::abs(f(x + opt.panelWidth));
    scale = std::max(scale, f0);
    if (f0 == 0.0 && f1 == 0.0) {
      tail = 0.0;
      found = x > a;
      if (found) break;
      continue;
    }
    const double rate = std::log(f0 / f1) / opt.panelWidth;
    if (!(rate >= opt.decayRate / 4)) continue;
    tail = f0 / rate;
    const double budget = opt.relative ? opt.tol * scale : opt.tol;
    if (tail < budget / 10) {
      found = true;
      break;
    }
  }
  if (!found) throw ConvergenceError("integrand tail did not decay below tolerance before the cutoff");
  QuadratureOptions inner = opt;
  if (!opt.relative) inner.tol = opt.tol - tail;
  auto res = integrateFinite(f, a, x, inner);
  res.tailBound = tail;
  return res;
}

}  // namespace wpcone
