#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <tuple>
#include <vector>

#include <gtest/gtest.h>

#include "wpcone/format.hpp"
#include "wpcone/numeric_recursion.hpp"
#include "wpcone/recursion.hpp"

using namespace wpcone;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<SurfaceSignature> signaturesUpTo(int gmax, int nmax) {
  std::vector<SurfaceSignature> out;
  for (int g = 0; g <= gmax; ++g)
    for (int total = 0; total <= nmax; ++total)
      for (int n = 0; n <= total; ++n) {
        const SurfaceSignature s{g, total - n, n};
        if (s.stable()) out.push_back(s);
      }
  return out;
}

using SplitKey = std::tuple<int, std::vector<int>, std::vector<int>, int, std::vector<int>, std::vector<int>>;

SplitKey key(const Splitting& s) { return {s.g1, s.I1, s.J1, s.g2, s.I2, s.J2}; }

// Every assignment of the leftover boundaries and cones to two sides, filtered by sub-surface stability.
std::set<SplitKey> bruteForceSplittings(const SurfaceSignature& sig, std::size_t d) {
  std::vector<int> bounds, cones;
  for (int i = 0; i < sig.m; ++i)
    if (static_cast<std::size_t>(i) != d) bounds.push_back(i);
  for (int j = 0; j < sig.n; ++j)
    if (static_cast<std::size_t>(sig.m + j) != d) cones.push_back(j);
  std::set<SplitKey> out;
  for (int g1 = 0; g1 <= sig.g; ++g1)
    for (unsigned bm = 0; bm < (1u << bounds.size()); ++bm)
      for (unsigned cm = 0; cm < (1u << cones.size()); ++cm) {
        std::vector<int> I1, I2, J1, J2;
        for (std::size_t i = 0; i < bounds.size(); ++i) ((bm >> i) & 1u ? I1 : I2).push_back(bounds[i]);
        for (std::size_t j = 0; j < cones.size(); ++j) ((cm >> j) & 1u ? J1 : J2).push_back(cones[j]);
        const SurfaceSignature a{g1, int(I1.size()) + 1, int(J1.size())};
        const SurfaceSignature b{sig.g - g1, int(I2.size()) + 1, int(J2.size())};
        if (a.stable() && b.stable()) out.insert({g1, I1, J1, sig.g - g1, I2, J2});
      }
  return out;
}

VolumePolynomial halfSlotDerivative(const VolumePolynomial& v, std::size_t slot) {
  const Variable wrt = v.kind(slot) == SlotKind::Length ? Variable::Length : Variable::Angle;
  return v.multiplyBySlot(slot).scaled(Rational(1, 2)).partialDerivative(slot, wrt);
}

}  // namespace

TEST(DeltaFactor, Examples) {
  EXPECT_EQ(deltaFactor({1, 1, 0}), 1);
  EXPECT_EQ(deltaFactor({0, 3, 0}), 0);
  EXPECT_EQ(deltaFactor({2, 1, 0}), 0);
  EXPECT_EQ(deltaFactor({1, 0, 1}), 0);
  EXPECT_THROW(deltaFactor({0, 2, 0}), DomainError);
  EXPECT_THROW(deltaFactor({1, 0, 0}), DomainError);
}

TEST(Splittings, FourHoledSphereHasNoStableSplit) {
  EXPECT_TRUE(enumerateSplittings({0, 4, 0}, 0).empty());
  EXPECT_TRUE(bruteForceSplittings({0, 4, 0}, 0).empty());
}

TEST(Splittings, OneHoledTorusHasNone) {
  EXPECT_TRUE(enumerateSplittings({1, 1, 0}, 0).empty());
  EXPECT_TRUE(bruteForceSplittings({1, 1, 0}, 0).empty());
}

TEST(Splittings, MatchBruteForce) {
  for (const auto& sig : signaturesUpTo(3, 6))
    for (std::size_t d = 0; d < static_cast<std::size_t>(sig.totalSlots()); ++d) {
      const auto list = enumerateSplittings(sig, d);
      std::set<SplitKey> got;
      for (const auto& s : list) {
        EXPECT_TRUE(got.insert(key(s)).second) << "duplicate in " << sig.str();
        EXPECT_EQ(s.deltaWeight1, deltaFactor(s.first()));
        EXPECT_EQ(s.deltaWeight2, deltaFactor(s.second()));
        EXPECT_EQ(s.g1 + s.g2, sig.g);
      }
      EXPECT_EQ(got, bruteForceSplittings(sig, d)) << sig.str() << " slot " << d;
    }
}

TEST(Splittings, ClosedUnderMirror) {
  for (const auto& sig : signaturesUpTo(3, 6)) {
    if (sig.totalSlots() == 0) continue;
    const auto list = enumerateSplittings(sig, 0);
    for (const auto& s : list)
      EXPECT_NE(std::find(list.begin(), list.end(), s.mirrored()), list.end()) << sig.str();
  }
}

TEST(Splittings, DeterministicAndSmallExample) {
  const auto a = enumerateSplittings({0, 5, 0}, 0), b = enumerateSplittings({0, 5, 0}, 0);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.size(), 6u);  // choose 2 of {1,2,3,4} for the first side
  EXPECT_THROW(enumerateSplittings({0, 3, 0}, 3), DomainError);
}

TEST(RecursionTerms, Structure) {
  for (const auto& t : recursionTerms({0, 4, 0}, 0)) EXPECT_EQ(t.kind, RecursionTerm::Kind::BoundaryPairing);
  EXPECT_EQ(recursionTerms({0, 4, 0}, 0).size(), 3u);
  const auto torus = recursionTerms({1, 1, 0}, 0);
  ASSERT_EQ(torus.size(), 1u);
  EXPECT_EQ(torus[0].kind, RecursionTerm::Kind::NonSeparating);
  const auto mixed = recursionTerms({1, 1, 2}, 1);
  EXPECT_EQ(std::count_if(mixed.begin(), mixed.end(), [](auto& t) { return t.kind == RecursionTerm::Kind::ConePairing; }), 1);
  EXPECT_EQ(std::count_if(mixed.begin(), mixed.end(), [](auto& t) { return t.kind == RecursionTerm::Kind::BoundaryPairing; }), 1);
}

TEST(ComputeVolume, BaseExamples) {
  VolumeEngine e;
  EXPECT_EQ(toText(e.computeVolume({0, 3, 0})), "1");
  EXPECT_EQ(toText(e.computeVolume({1, 0, 1})), "-1/48*theta_1^2 + 1/12*pi^2");
  EXPECT_EQ(toText(e.computeVolume({1, 1, 0})), "1/48*l_1^2 + 1/12*pi^2");
  EXPECT_EQ(toText(e.computeVolume({0, 4, 0})), "1/2*l_1^2 + 1/2*l_2^2 + 1/2*l_3^2 + 1/2*l_4^2 + 2*pi^2");
  EXPECT_EQ(toText(e.computeVolume({0, 2, 1})), "1");
  EXPECT_EQ(toText(e.computeVolume({0, 0, 3})), "1");
}

TEST(ComputeVolume, KnownClosedSurfaces) {
  VolumeEngine e;
  EXPECT_EQ(toText(e.computeVolume({2, 0, 0})), "43/2160*pi^6");
  EXPECT_EQ(toText(e.computeVolume({3, 0, 0})), "176557/1209600*pi^12");
}

TEST(ComputeVolume, KnownBoundaryPolynomials) {
  VolumeEngine e;
  // Constant terms of the standard tables.
  EXPECT_EQ(toText(e.computeVolume({0, 5, 0}).atZero(0).atZero(1).atZero(2).atZero(3).atZero(4)), "10*pi^4");
  EXPECT_EQ(toText(e.computeVolume({1, 2, 0}).atZero(0).atZero(1)), "1/4*pi^4");
  EXPECT_EQ(toText(e.computeVolume({2, 1, 0}).atZero(0)), "29/192*pi^8");
  const auto v12 = e.computeVolume({1, 2, 0});
  EXPECT_EQ(toText(v12), "1/192*l_1^4 + 1/96*l_1^2*l_2^2 + 1/12*pi^2*l_1^2 + 1/192*l_2^4 + 1/12*pi^2*l_2^2 + 1/4*pi^4");
}

TEST(ComputeVolume, ConeSlotIsSubstitutedBoundary) {
  VolumeEngine e;
  EXPECT_EQ(e.computeVolume({1, 1, 1}), e.computeVolume({1, 2, 0}).substituteImaginary(1));
  EXPECT_EQ(e.computeVolume({0, 1, 3}),
            e.computeVolume({0, 4, 0}).substituteImaginary(1).substituteImaginary(2).substituteImaginary(3));
}

TEST(ComputeVolume, DirectConeRecursionAgreesWithSubstitution) {
  VolumeEngine e;
  for (const auto& sig : signaturesUpTo(2, 5))
    if (sig.n > 0) EXPECT_EQ(e.directVolume(sig), e.computeVolume(sig)) << sig.str();
}

TEST(ComputeVolume, Caps) {
  EngineOptions opt;
  opt.maxGenus = 1;
  opt.maxSlots = 3;
  VolumeEngine e(opt);
  EXPECT_THROW(e.computeVolume({2, 1, 0}), DomainError);
  EXPECT_THROW(e.computeVolume({0, 4, 0}), DomainError);
  EXPECT_THROW(e.computeVolume({0, 2, 0}), DomainError);
  EXPECT_NO_THROW(e.computeVolume({1, 2, 1}));
}

TEST(AssembleRHS, OneHoledTorusDifferentiatesKnownVolume) {
  VolumeEngine e;
  const auto raw = VolumePolynomial::slotSquare(1, 0).scaled(Rational(1, 24)) + VolumePolynomial::constant(1, Rational(1, 6), 2);
  EXPECT_EQ(e.assembleRHS({1, 1, 0}, 0), halfSlotDerivative(raw, 0));
  // public volume is half the raw one
  EXPECT_EQ(e.computeVolume({1, 1, 0}), raw.scaled(Rational(1, 2)));
}

TEST(AssembleRHS, RoundTripForEveryComputedSignature) {
  VolumeEngine e;
  for (const auto& sig : signaturesUpTo(2, 5)) {
    if (sig.totalSlots() == 0) continue;
    for (std::size_t d = 0; d < static_cast<std::size_t>(sig.totalSlots()); ++d)
      EXPECT_EQ(e.assembleRHS(sig, d), halfSlotDerivative(e.rawVolume(sig), d)) << sig.str() << " slot " << d;
  }
}

TEST(AssembleRHS, GenusTwoMatchesNumericAssembly) {
  VolumeEngine e;
  NumericRecursion num(e);
  const SurfaceSignature sig{2, 1, 0};
  const auto rhs = e.assembleRHS(sig, 0);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> L(0.05, 8.0);
  for (int i = 0; i < 10; ++i) {
    const std::vector<double> p{L(rng)};
    const double exact = rhs.evalNumeric(p, kPi);
    EXPECT_LE(std::abs(num.rhs(sig, 0, p) - exact), 1e-8 * std::abs(exact)) << p[0];
  }
}

TEST(IntegrateDistinguished, Monomials) {
  const auto x = VolumePolynomial::slotSquare(1, 0);
  EXPECT_EQ(integrateDistinguished(x.scaled(Rational(3, 2)), 0), x);
  EXPECT_TRUE(integrateDistinguished(VolumePolynomial(1), 0).isZero());
  VolumePolynomial odd(1);
  odd.addTerm(Monomial{{0}, 1u}, 0, 1);
  EXPECT_THROW(integrateDistinguished(odd, 0), InvariantError);
  const auto pi2 = VolumePolynomial::constant(1, 1, 2);
  EXPECT_EQ(integrateDistinguished(pi2, 0), pi2.scaled(2));
}

TEST(IntegrateDistinguished, RoundTripFourHoledSphere) {
  VolumeEngine e;
  const auto v = e.computeVolume({0, 4, 0});
  EXPECT_EQ(integrateDistinguished(halfSlotDerivative(v, 0), 0), v);
}

TEST(Symmetry, AnyDistinguishedSlotGivesTheSameVolume) {
  VolumeEngine e;
  for (const auto& sig : signaturesUpTo(2, 5))
    for (std::size_t d = 0; d < static_cast<std::size_t>(sig.totalSlots()); ++d)
      EXPECT_EQ(e.rawVolumeFrom(sig, d), e.rawVolume(sig)) << sig.str() << " slot " << d;
}

TEST(Symmetry, PermutingLikeSlots) {
  VolumeEngine e;
  std::mt19937 rng(3);
  for (const auto& sig : signaturesUpTo(2, 5)) {
    const auto v = e.computeVolume(sig);
    for (int trial = 0; trial < 4; ++trial) {
      std::vector<std::size_t> perm(sig.totalSlots());
      for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
      std::shuffle(perm.begin(), perm.begin() + sig.m, rng);
      std::shuffle(perm.begin() + sig.m, perm.end(), rng);
      EXPECT_EQ(v.permuted(perm), v) << sig.str();
    }
  }
}

TEST(Homogeneity, EveryComputedVolume) {
  VolumeEngine e;
  for (const auto& sig : signaturesUpTo(3, 4)) {
    const auto v = e.computeVolume(sig);
    EXPECT_TRUE(v.isHomogeneous(sig.degree())) << sig.str();
    EXPECT_TRUE(v.isEven()) << sig.str();
    EXPECT_EQ(v.kinds(), sig.kinds());
  }
}

TEST(Memo, RepeatedCallsAreIdentical) {
  VolumeEngine e;
  const auto first = e.computeVolume({2, 2, 1});
  const auto size = e.memoSize();
  EXPECT_EQ(e.computeVolume({2, 2, 1}), first);
  EXPECT_EQ(e.memoSize(), size);
  e.clear();
  EXPECT_EQ(e.memoSize(), 0u);
  EXPECT_EQ(e.computeVolume({2, 2, 1}), first);
}

TEST(Memo, ThreadedEngineIsBitIdentical) {
  EngineOptions opt;
  opt.threads = 4;
  VolumeEngine par(opt), seq;
  for (const auto& sig : signaturesUpTo(2, 5)) {
    EXPECT_EQ(toJson(par.computeVolume(sig)).dump(), toJson(seq.computeVolume(sig)).dump()) << sig.str();
    EXPECT_EQ(par.directVolume(sig), seq.directVolume(sig));
  }
}

TEST(NumericRecursion, VolumeMatchesSymbolic) {
  VolumeEngine e;
  NumericRecursion num(e);
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> L(0.1, 6.0), T(0.1, kPi);
  for (const SurfaceSignature sig : {SurfaceSignature{1, 1, 0}, SurfaceSignature{0, 1, 2}, SurfaceSignature{1, 0, 2}}) {
    const auto v = e.computeVolume(sig);
    for (int i = 0; i < 5; ++i) {
      std::vector<double> p;
      for (int k = 0; k < sig.m; ++k) p.push_back(L(rng));
      for (int k = 0; k < sig.n; ++k) p.push_back(T(rng));
      const double exact = v.evalNumeric(p, kPi);
      EXPECT_LE(std::abs(num.volume(sig, p) - exact), 1e-8 * std::abs(exact)) << sig.str();
    }
  }
}
