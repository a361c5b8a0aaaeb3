// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "wpcone/cli.hpp"
#include "wpcone/conepoints.hpp"
#include "wpcone/format.hpp"
#include "wpcone/kernels.hpp"
#include "wpcone/mcshane.hpp"
#include "wpcone/numeric_recursion.hpp"
#include "wpcone/recursion.hpp"

using namespace wpcone;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::string detail;
  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail = what;
    pass = pass && ok;
  }
};

int failures = 0;

void criterion(int id, const std::string& title, double budgetSeconds, const std::function<void(Outcome&)>& body) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(o);
  } catch (const std::exception& e) {
    o.require(false, std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (budgetSeconds > 0) o.require(secs < budgetSeconds, "over the time budget");
  if (!o.pass) ++failures;
  std::printf("%s  %d  %s  (%.3f s)%s%s\n", o.pass ? "PASS" : "FAIL", id, title.c_str(), secs, o.detail.empty() ? "" : "  ",
              o.detail.c_str());
  std::fflush(stdout);
}

std::vector<SurfaceSignature> signatures(int gmax, int nmax) {
  std::vector<SurfaceSignature> out;
  for (int g = 0; g <= gmax; ++g)
    for (int total = 0; total <= nmax; ++total)
      for (int n = 0; n <= total; ++n)
        if (SurfaceSignature s{g, total - n, n}; s.stable()) out.push_back(s);
  return out;
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(3);
  s << v;
  return s.str();
}

}  // namespace

int main() {
  criterion(1, "one-cone torus volume in closed form", 1.0, [](Outcome& o) {
    std::ostringstream out, err;
    const int code = cli::run({"volume", "--g", "1", "--cones", "1"}, out, err);
    o.require(code == 0, "exit " + std::to_string(code));
    o.require(out.str() == "-1/48*theta_1^2 + 1/12*pi^2\n", "got " + out.str());
    std::ostringstream latex;
    cli::run({"volume", "--g", "1", "--cones", "1", "--format", "latex"}, latex, err);
    o.require(latex.str() == "-\\frac{\\theta_1^2}{48}+\\frac{\\pi^2}{12}\n", "latex " + latex.str());
  });

  criterion(2, "pants volumes are 1 for every boundary/cone mix", 0, [](Outcome& o) {
    VolumeEngine e;
    for (int n = 0; n <= 3; ++n) {
      const SurfaceSignature s{0, 3 - n, n};
      o.require(e.computeVolume(s) == VolumePolynomial::constant(s.kinds(), 1), s.str());
      o.require(e.directVolume(s) == VolumePolynomial::constant(s.kinds(), 1), s.str() + " direct");
    }
  });

  criterion(3, "direct cone recursion equals substitution, g <= 2, m + n <= 4", 60.0, [](Outcome& o) {
    VolumeEngine e;
    for (const auto& s : signatures(2, 4)) o.require(e.directVolume(s) == e.computeVolume(s), s.str());
  });

  criterion(4, "kernel contour values and moments k <= 6 against quadrature to 1e-9", 30.0, [](Outcome& o) {
    QuadratureOptions q;
    q.tol = 1e-12;
    for (double th : {0.1, 0.5, 1.0, 2.0, kPi}) {
      const double v = quadratureOracle([th](double x) { return x > 0 ? x * kernelDerivativeH(th, x) : 0.0; }, 0.0, q).value;
      const double exact = kPi * kPi / 6 - th * th / 8;
      o.require(std::abs(v - exact) <= 1e-9, "contour theta=" + fmt(th));
    }
    QuadratureOptions qr;
    qr.tol = 1e-13;
    qr.relative = true;
    const MomentTable table(6);
    std::mt19937 rng(4);
    std::uniform_real_distribution<double> T(0.0, 10.0);
    for (int k = 0; k <= 6; ++k)
      for (int i = 0; i < 20; ++i) {
        const double t = T(rng);
        const double exact = momentIntegralValue(k, t, table).real();
        const double v =
            quadratureOracle([&](double x) { return std::pow(x, 2 * k + 1) * pairKernel(x, t).real(); }, 0.0, qr).value;
        o.require(std::abs(v - exact) <= 1e-9 * std::max(1.0, std::abs(exact)), "moment k=" + std::to_string(k) + " t=" + fmt(t));
      }
  });

  criterion(5, "theta V(theta) = int x D dx on a 20-point grid to 1e-8", 30.0, [](Outcome& o) {
    VolumeEngine e;
    const auto v = e.computeVolume({1, 0, 1});
    for (int i = 1; i <= 20; ++i) {
      const double th = kPi * i / 20;
      const double exact = v.evalNumeric(std::vector<double>{th}, kPi);
      o.require(std::abs(integrateVolumeIdentity(th) - exact) <= 1e-8, "theta=" + fmt(th));
    }
  });

  std::vector<double> cuts;
  for (double c = 10; c <= 40; c += 1) cuts.push_back(c);
  const std::vector<std::pair<std::string, BoundaryLabel>> holes{
      {"cone pi", BoundaryLabel::cone(kPi)},       {"cone pi/2", BoundaryLabel::cone(kPi / 2)},
      {"cone 1", BoundaryLabel::cone(1.0)},        {"boundary 1", BoundaryLabel::geodesic(1.0)},
      {"boundary 2", BoundaryLabel::geodesic(2.0)}, {"cusp", BoundaryLabel::cusp()}};
  for (const auto& [name, hole] : holes)
    criterion(6, "McShane sum, " + name + ": residual < 1e-6 at 40, monotone beyond 15", 60.0, [&](Outcome& o) {
      const auto rep = mcshaneSum(hole, cuts);
      o.require(rep.finalResidual() < 1e-6L, "residual " + fmt(static_cast<double>(rep.finalResidual())));
      for (std::size_t i = 1; i < rep.partialSums.size(); ++i)
        if (rep.partialSums[i - 1].cutoff >= 15)
          o.require(rep.partialSums[i].residual <= rep.partialSums[i - 1].residual,
                    "residual rose at cutoff " + fmt(rep.partialSums[i].cutoff));
      if (hole.kind == BoundaryLabel::Kind::Cusp) o.require(rep.target == 0.5L, "cusp target");
    });

  criterion(7, "symbolic volumes against numeric-kernel recursion, 30 points, 1e-8", 0, [](Outcome& o) {
    VolumeEngine e;
    NumericRecursion num(e);
    std::mt19937 rng(2718);
    std::uniform_real_distribution<double> L(0.1, 6.0), T(0.05, kPi);
    for (const SurfaceSignature s : {SurfaceSignature{0, 4, 0}, SurfaceSignature{1, 2, 0}, SurfaceSignature{1, 1, 1},
                                     SurfaceSignature{2, 1, 0}}) {
      const auto v = e.computeVolume(s);
      double worst = 0;
      for (int i = 0; i < 30; ++i) {
        std::vector<double> p;
        for (int k = 0; k < s.m; ++k) p.push_back(L(rng));
        for (int k = 0; k < s.n; ++k) p.push_back(T(rng));
        const double exact = v.evalNumeric(p, kPi);
        worst = std::max(worst, std::abs(num.volume(s, p) - exact) / std::abs(exact));
      }
      o.require(worst <= 1e-8, s.str() + " relative error " + fmt(worst));
    }
  });

  criterion(8, "property suites over g <= 3, m + n <= 4", 0, [](Outcome& o) {
    VolumeEngine e;
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> L(0.0, 10.0), T(1e-3, kPi);
    for (const auto& s : signatures(3, 4)) {
      const auto v = e.computeVolume(s);
      o.require(v.isHomogeneous(s.degree()) && v.isEven(), "homogeneity " + s.str());
      for (int trial = 0; trial < 3; ++trial) {
        std::vector<std::size_t> perm(s.totalSlots());
        for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
        std::shuffle(perm.begin(), perm.begin() + s.m, rng);
        std::shuffle(perm.begin() + s.m, perm.end(), rng);
        o.require(v.permuted(perm) == v, "permutation " + s.str());
      }
      const auto boundary = e.computeVolume({s.g, s.totalSlots(), 0});
      for (int i = 0; i < 40; ++i) {
        std::vector<double> lengths, angles, all;
        std::vector<std::complex<double>> z;
        for (int k = 0; k < s.m; ++k) lengths.push_back(L(rng)), z.emplace_back(lengths.back(), 0.0);
        for (int k = 0; k < s.n; ++k) angles.push_back(T(rng)), z.emplace_back(0.0, angles.back());
        all = lengths;
        all.insert(all.end(), angles.begin(), angles.end());
        const double real = v.evalNumeric(all, kPi);
        const auto c = boundary.evalComplex(z, kPi);
        const double scale = std::max(1.0, std::abs(real));
        o.require(std::abs(c.imag()) <= 1e-12 * scale && std::abs(c.real() - real) <= 1e-12 * scale, "realness " + s.str());
        double area = 2 * kPi * (2 * s.g - 2 + s.m + s.n);
        for (double a : angles) area -= a;
        if (area > 0) o.require(volumeValue(e, {s, lengths, angles}) > 0, "positivity " + s.str());
      }
    }
    // derivative transfer for the first gap, second order in h
    for (double th : {0.4, 1.3, 2.9})
      for (double x : {0.5, 2.0})
        for (double y : {0.3, 4.0}) {
          const auto alpha = BoundaryLabel::geodesic(x), beta = BoundaryLabel::geodesic(y);
          const double analytic = gapDerivative({GapCase::Gap1, BoundaryLabel::cone(th), alpha, beta}).real();
          double prev = 0;
          for (double h : {1e-2, 5e-3, 2.5e-3}) {
            const double fd =
                (coneGap(GapCase::Gap1, th + h, alpha, beta) - coneGap(GapCase::Gap1, th - h, alpha, beta)) / (2 * h);
            const double err = std::abs(fd - analytic);
            o.require(err <= h * h, "derivative transfer theta=" + fmt(th));
            if (prev > 1e-13) o.require(std::abs(prev / err - 4.0) < 0.2, "derivative transfer order theta=" + fmt(th));
            prev = err;
          }
        }
  });

  std::printf("%s\n", failures ? "SOME CRITERIA FAILED" : "ALL CRITERIA PASSED");
  return failures ? 1 : 0;
}
