#pragma once

// Volume recursion over surfaces with geodesic boundaries and cone points.
//
// Slot layout of a signature (g, m, n): boundaries 0..m-1, then cones m..m+n-1.
// The engine memoizes raw volumes by (g, m, n). Raw and public volumes differ
// only for the one-holed torus (and its one-cone twin), where public = raw / 2.
//
// With t the distinguished slot (t = l, or t = i*theta on a cone slot):
//
//   d(t V / 2)/dt = 1/4 int int xy H(x+y, t) [V_{g-1}(x, y, rest) + sum_splits V_1(x, ..) V_2(y, ..)]
//                 + 1/4 sum_j int x [H(x, t + s_j) + H(x, t - s_j)] V_g(x, rest \ j)
//
// where H(x, t) = 1/(1+e^{(x+t)/2}) + 1/(1+e^{(x-t)/2}) and sub-volumes are public.

#include <algorithm>
#include <compare>
#include <cstddef>
#include <future>
#include <initializer_list>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <tuple>
#include <vector>

#include "wpcone/errors.hpp"
#include "wpcone/kernels.hpp"
#include "wpcone/polyalg.hpp"

namespace wpcone {

struct SurfaceSignature {
  int g = 0;
  int m = 0;  // geodesic boundaries
  int n = 0;  // cone points

  int totalSlots() const { return m + n; }
  bool stable() const { return g >= 0 && m >= 0 && n >= 0 && 2 * g - 2 + m + n > 0; }
  int dimension() const { return 6 * g - 6 + 2 * m + 2 * n; }
  /// Degree in the grading where x_i and pi^2 both count 1.
  int degree() const { return 3 * g - 3 + m + n; }

  std::string str() const {
    return "(" + std::to_string(g) + ", " + std::to_string(m) + ", " + std::to_string(n) + ")";
  }

  void validate() const {
    if (g < 0 || m < 0 || n < 0) throw DomainError("signature " + str() + " has a negative entry");
    if (!stable()) throw DomainError("signature " + str() + " is unstable: need 2g - 2 + m + n > 0");
  }

  std::vector<SlotKind> kinds() const {
    std::vector<SlotKind> k(m, SlotKind::Length);
    k.insert(k.end(), n, SlotKind::Angle);
    return k;
  }

  auto operator<=>(const SurfaceSignature&) const = default;
};

/// 1 iff (g, m, n) = (1, 1, 0).
inline int deltaFactor(const SurfaceSignature& sig) {
  sig.validate();
  return (sig.g == 1 && sig.m == 1 && sig.n == 0) ? 1 : 0;
}

/// The one-handle weight exponent of a sub-surface: delta of its all-boundary form.
inline int oneHandleExponent(const SurfaceSignature& sig) {
  return deltaFactor(SurfaceSignature{sig.g, sig.m + sig.n, 0});
}

/// One ordered pair of the splitting set. I* hold boundary indices, J* cone indices (both 0-based).
struct Splitting {
  int g1 = 0, g2 = 0;
  std::vector<int> I1, I2;
  std::vector<int> J1, J2;
  int deltaWeight1 = 0, deltaWeight2 = 0;

  /// Sub-surface signatures; the new boundary (x or y) is a geodesic.
  SurfaceSignature first() const { return {g1, static_cast<int>(I1.size()) + 1, static_cast<int>(J1.size())}; }
  SurfaceSignature second() const { return {g2, static_cast<int>(I2.size()) + 1, static_cast<int>(J2.size())}; }

  Splitting mirrored() const { return {g2, g1, I2, I1, J2, J1, deltaWeight2, deltaWeight1}; }

  friend bool operator==(const Splitting&, const Splitting&) = default;
};

namespace detail {

inline void checkSlot(const SurfaceSignature& sig, std::size_t slot) {
  if (slot >= static_cast<std::size_t>(sig.totalSlots()))
    throw DomainError("distinguished slot " + std::to_string(slot) + " out of range for signature " + sig.str());
}

/// Slots other than `skip`, in layout order.
inline std::vector<std::size_t> otherSlots(const SurfaceSignature& sig, std::initializer_list<std::size_t> skip) {
  std::vector<std::size_t> out;
  for (std::size_t s = 0; s < static_cast<std::size_t>(sig.totalSlots()); ++s)
    if (std::find(skip.begin(), skip.end(), s) == skip.end()) out.push_back(s);
  return out;
}

}  // namespace detail

inline std::vector<Splitting> enumerateSplittings(const SurfaceSignature& sig, std::size_t distinguishedSlot) {
  sig.validate();
  detail::checkSlot(sig, distinguishedSlot);
  const auto rest = detail::otherSlots(sig, {distinguishedSlot});
  const std::size_t r = rest.size();
  std::vector<Splitting> out;
  for (int g1 = 0; g1 <= sig.g; ++g1) {
    for (std::size_t mask = 0; mask < (std::size_t{1} << r); ++mask) {
      Splitting s;
      s.g1 = g1;
      s.g2 = sig.g - g1;
      for (std::size_t i = 0; i < r; ++i) {
        const int slot = static_cast<int>(rest[i]);
        const bool cone = slot >= sig.m;
        const int idx = cone ? slot - sig.m : slot;
        auto& I = (mask >> i) & 1u ? s.I1 : s.I2;
        auto& J = (mask >> i) & 1u ? s.J1 : s.J2;
        (cone ? J : I).push_back(idx);
      }
      const auto a = s.first(), b = s.second();
      if (2 * a.g + a.m - 1 + a.n < 2 || 2 * b.g + b.m - 1 + b.n < 2) continue;
      s.deltaWeight1 = deltaFactor(a);
      s.deltaWeight2 = deltaFactor(b);
      out.push_back(std::move(s));
    }
  }
  return out;
}

struct RecursionTerm {
  enum class Kind { NonSeparating, Separating, BoundaryPairing, ConePairing };
  Kind kind = Kind::NonSeparating;
  Splitting splitting;      // Separating only
  std::size_t partner = 0;  // pairing terms: slot of the boundary or cone paired with
};

inline const char* toString(RecursionTerm::Kind k) {
  switch (k) {
    case RecursionTerm::Kind::NonSeparating: return "non-separating";
    case RecursionTerm::Kind::Separating: return "separating";
    case RecursionTerm::Kind::BoundaryPairing: return "boundary-pairing";
    case RecursionTerm::Kind::ConePairing: return "cone-pairing";
  }
  return "?";
}

/// Summands of the recursion for `sig` with slot `d` distinguished. For the
/// one-holed torus the non-separating term is the single-pants base case.
inline std::vector<RecursionTerm> recursionTerms(const SurfaceSignature& sig, std::size_t d) {
  sig.validate();
  detail::checkSlot(sig, d);
  std::vector<RecursionTerm> terms;
  if (sig.g >= 1) terms.push_back({RecursionTerm::Kind::NonSeparating, {}, 0});
  if (sig.g == 1 && sig.totalSlots() == 1) return terms;
  for (auto& s : enumerateSplittings(sig, d)) terms.push_back({RecursionTerm::Kind::Separating, std::move(s), 0});
  for (std::size_t j : detail::otherSlots(sig, {d})) {
    const auto kind = static_cast<int>(j) < sig.m ? RecursionTerm::Kind::BoundaryPairing : RecursionTerm::Kind::ConePairing;
    terms.push_back({kind, {}, j});
  }
  return terms;
}

/// Invert d(l V / 2)/dl = rhs: antiderivative with zero constant term, then divide by l/2.
inline VolumePolynomial integrateDistinguished(const VolumePolynomial& rhs, std::size_t slot) {
  auto v = rhs.antiderivative(slot).divideBySlot(slot).scaled(2);
  if (!v.isEvenIn(slot)) throw InvariantError("integrated volume is odd in the distinguished slot");
  return v;
}

inline BigInt binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  BigInt r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

struct EngineOptions {
  int maxGenus = 5;
  int maxSlots = 8;
  unsigned threads = 1;
  bool distinguishCone = true;  // recurse on the first cone slot when there is one
};

class VolumeEngine {
 public:
  explicit VolumeEngine(EngineOptions opt = {})
      : opt_(opt), moments_(std::make_shared<MomentTable>(std::max(1, 3 * opt.maxGenus + opt.maxSlots + 1))) {
    if (opt.maxGenus < 0 || opt.maxSlots < 0) throw DomainError("recursion caps must be non-negative");
  }

  const EngineOptions& options() const { return opt_; }

  /// Public volume: all-boundary recursion, then l = i*theta on the cone slots.
  VolumePolynomial computeVolume(const SurfaceSignature& sig) {
    checkCaps(sig);
    const SurfaceSignature all{sig.g, sig.totalSlots(), 0};
    VolumePolynomial v = publicVolume(all);
    for (int c = 0; c < sig.n; ++c) v = v.substituteImaginary(static_cast<std::size_t>(sig.m + c));
    return v;
  }

  /// Public volume computed by recursing directly on cone slots (verification path).
  VolumePolynomial directVolume(const SurfaceSignature& sig) {
    checkCaps(sig);
    return publicVolume(sig);
  }

  /// Memoized raw volume on the direct path.
  VolumePolynomial rawVolume(const SurfaceSignature& sig) {
    checkCaps(sig);
    return *raw(sig);
  }

  /// Raw volume with an explicit distinguished slot; bypasses the memo for `sig` itself.
  VolumePolynomial rawVolumeFrom(const SurfaceSignature& sig, std::size_t slot) {
    checkCaps(sig);
    if (sig.totalSlots() == 0) return *raw(sig);
    return certify(sig, integrateDistinguished(assembleRHS(sig, slot), slot));
  }

  std::size_t defaultSlot(const SurfaceSignature& sig) const {
    return (opt_.distinguishCone && sig.n > 0) ? static_cast<std::size_t>(sig.m) : 0;
  }

  /// d(t V_raw / 2)/dt as an exact polynomial over the layout of `sig`.
  VolumePolynomial assembleRHS(const SurfaceSignature& sig, std::size_t d) {
    sig.validate();
    detail::checkSlot(sig, d);
    const auto kinds = sig.kinds();
    const int sd = kinds[d] == SlotKind::Length ? 1 : -1;
    VolumePolynomial rhs(kinds);
    if (sig.g == 0 && sig.totalSlots() == 3) {
      rhs.addTerm(zeroMonomial(kinds.size()), 0, Rational(1, 2));
      return rhs;
    }
    if (sig.g == 1 && sig.totalSlots() == 1) {
      // single pants with alpha = beta: int x dGap1(t; x, x) dx = F_1(t) / 8
      const auto& row = moments().coefficients(0);
      for (std::size_t j = 0; j < row.size(); ++j)
        rhs.addTerms(slotMonomial(1, d, static_cast<int>(j)), row[j], Rational(signPow(sd, j), 8));
      return rhs;
    }

    const auto terms = recursionTerms(sig, d);
    // Fill the memo first so the (possibly concurrent) assembly only reads.
    for (const auto& t : terms)
      for (const auto& s : subSignatures(sig, d, t)) raw(s);

    std::vector<VolumePolynomial> parts(terms.size(), VolumePolynomial(kinds));
    auto work = [&](std::size_t i) { parts[i] = termContribution(sig, d, terms[i]); };
    const unsigned threads = std::max(1u, opt_.threads);
    if (threads == 1) {
      for (std::size_t i = 0; i < terms.size(); ++i) work(i);
    } else {
      std::vector<std::future<void>> jobs;
      for (unsigned w = 0; w < threads; ++w)
        jobs.push_back(std::async(std::launch::async, [&, w] {
          for (std::size_t i = w; i < terms.size(); i += threads) work(i);
        }));
      for (auto& j : jobs) j.get();
    }
    for (const auto& p : parts) rhs += p;
    return rhs;
  }

  std::size_t memoSize() const {
    std::lock_guard lock(mu_);
    return memo_.size();
  }

  void clear() {
    std::lock_guard lock(mu_);
    memo_.clear();
  }

 private:
  using Key = std::tuple<int, int, int>;

  struct SubTerm {
    int a = 0;  // exponent of x^2
    int b = 0;  // exponent of y^2
    Monomial rest;
    PiCoefficient coeff;
  };

  static Monomial zeroMonomial(std::size_t n) { return Monomial{std::vector<int>(n, 0), 0}; }
  static Monomial slotMonomial(std::size_t n, std::size_t slot, int xexp) {
    Monomial m = zeroMonomial(n);
    m.xexp[slot] = xexp;
    return m;
  }
  static int signPow(int s, std::size_t e) { return (s < 0 && e % 2) ? -1 : 1; }

  const MomentTable& moments() const { return *moments_; }

  void checkCaps(const SurfaceSignature& sig) const {
    sig.validate();
    if (sig.g > opt_.maxGenus)
      throw DomainError("genus " + std::to_string(sig.g) + " exceeds the configured cap " + std::to_string(opt_.maxGenus));
    if (sig.totalSlots() > opt_.maxSlots)
      throw DomainError("slot count " + std::to_string(sig.totalSlots()) + " exceeds the configured cap " +
                        std::to_string(opt_.maxSlots));
  }

  VolumePolynomial publicVolume(const SurfaceSignature& sig) {
    auto r = raw(sig);
    return oneHandleExponent(sig) ? r->scaled(Rational(1, 2)) : *r;
  }

  VolumePolynomial certify(const SurfaceSignature& sig, VolumePolynomial v) const {
    if (!v.isEven()) throw InvariantError("volume " + sig.str() + " is not even in every slot");
    if (!v.isHomogeneous(sig.degree()))
      throw InvariantError("volume " + sig.str() + " is not homogeneous of degree " + std::to_string(sig.degree()));
    return v;
  }

  std::shared_ptr<const VolumePolynomial> raw(const SurfaceSignature& sig) {
    sig.validate();
    const Key key{sig.g, sig.m, sig.n};
    {
      std::lock_guard lock(mu_);
      if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    }
    VolumePolynomial v = sig.totalSlots() == 0 ? closedVolume(sig)
                                               : integrateDistinguished(assembleRHS(sig, defaultSlot(sig)), defaultSlot(sig));
    auto ptr = std::make_shared<const VolumePolynomial>(certify(sig, std::move(v)));
    std::lock_guard lock(mu_);
    return memo_.emplace(key, std::move(ptr)).first->second;
  }

  // V_{g,0} from V_{g,1}: dV_{g,1}/dl at l = 2 pi i equals 2 pi i (2g - 2) V_g.
  VolumePolynomial closedVolume(const SurfaceSignature& sig) {
    if (sig.g < 2) throw InvariantError("closed volume needs genus at least 2");
    const VolumePolynomial one = publicVolume(SurfaceSignature{sig.g, 1, 0});
    VolumePolynomial out(std::size_t{0});
    for (const auto& [mono, pc] : one.terms()) {
      const int j = mono.xexp[0];
      if (j == 0) continue;
      Rational scale = Rational(j, sig.g - 1);
      for (int i = 1; i < j; ++i) scale *= -4;
      out.addTerms(Monomial{{}, 0}, pc.timesPi(2 * (j - 1)), scale);
    }
    return out;
  }

  struct SubLayout {
    SurfaceSignature sig;
    std::vector<std::size_t> targets;  // target slot of sub slots past the integrated ones
  };

  static SubLayout layoutFor(const SurfaceSignature& sig, int g, int integrated, const std::vector<std::size_t>& keep) {
    int lengths = integrated, cones = 0;
    for (std::size_t s : keep) (static_cast<int>(s) < sig.m ? lengths : cones)++;
    return {{g, lengths, cones}, keep};
  }

  static std::vector<std::size_t> splittingSide(const SurfaceSignature& sig, const std::vector<int>& I,
                                                const std::vector<int>& J) {
    std::vector<std::size_t> out(I.begin(), I.end());
    for (int j : J) out.push_back(static_cast<std::size_t>(sig.m + j));
    return out;
  }

  static std::vector<SubLayout> layouts(const SurfaceSignature& sig, std::size_t d, const RecursionTerm& t) {
    using K = RecursionTerm::Kind;
    switch (t.kind) {
      case K::NonSeparating: return {layoutFor(sig, sig.g - 1, 2, detail::otherSlots(sig, {d}))};
      case K::Separating:
        return {layoutFor(sig, t.splitting.g1, 1, splittingSide(sig, t.splitting.I1, t.splitting.J1)),
                layoutFor(sig, t.splitting.g2, 1, splittingSide(sig, t.splitting.I2, t.splitting.J2))};
      case K::BoundaryPairing:
      case K::ConePairing: return {layoutFor(sig, sig.g, 1, detail::otherSlots(sig, {d, t.partner}))};
    }
    return {};
  }

  static std::vector<SurfaceSignature> subSignatures(const SurfaceSignature& sig, std::size_t d, const RecursionTerm& t) {
    std::vector<SurfaceSignature> out;
    for (const auto& l : layouts(sig, d, t)) out.push_back(l.sig);
    return out;
  }

  std::vector<SubTerm> subTerms(const SubLayout& layout, int integrated, std::size_t n) {
    const VolumePolynomial v = publicVolume(layout.sig);
    std::vector<SubTerm> out;
    out.reserve(v.terms().size());
    for (const auto& [mono, pc] : v.terms()) {
      SubTerm s;
      s.a = mono.xexp[0];
      s.b = integrated == 2 ? mono.xexp[1] : 0;
      s.rest = zeroMonomial(n);
      for (std::size_t i = 0; i < layout.targets.size(); ++i)
        s.rest.xexp[layout.targets[i]] = mono.xexp[integrated + i];
      s.coeff = pc;
      out.push_back(std::move(s));
    }
    return out;
  }

  static Rational betaWeight(int a, int b) {
    return Rational(factorial(2 * a + 1) * factorial(2 * b + 1), factorial(2 * a + 2 * b + 3));
  }

  VolumePolynomial termContribution(const SurfaceSignature& sig, std::size_t d, const RecursionTerm& t) {
    using K = RecursionTerm::Kind;
    const auto kinds = sig.kinds();
    const std::size_t n = kinds.size();
    const int sd = kinds[d] == SlotKind::Length ? 1 : -1;
    const auto subs = layouts(sig, d, t);
    VolumePolynomial out(kinds);

    if (t.kind == K::BoundaryPairing || t.kind == K::ConePairing) {
      // 1/4 int x^{2a+1} [H(x, t+s) + H(x, t-s)] dx = 1/4 sum_m f_{a,m} 2 sum_r C(2m,2r) t^{2m-2r} s^{2r}
      const int sj = kinds[t.partner] == SlotKind::Length ? 1 : -1;
      for (const auto& st : subTerms(subs[0], 1, n)) {
        const auto& row = moments().coefficients(st.a);
        for (std::size_t m = 0; m < row.size(); ++m) {
          const PiCoefficient base = st.coeff * row[m];
          for (std::size_t r = 0; r <= m; ++r) {
            Monomial mono = st.rest;
            mono.xexp[d] = static_cast<int>(m - r);
            mono.xexp[t.partner] = static_cast<int>(r);
            const int sign = signPow(sd, m - r) * signPow(sj, r);
            out.addTerms(mono, base, Rational(binomial(2 * static_cast<int>(m), 2 * static_cast<int>(r)) * sign, 2));
          }
        }
      }
      return out;
    }

    // Double integrals: group by (k = a + b + 1, rest) before expanding F_{2k+1}.
    std::map<std::pair<int, Monomial>, PiCoefficient> grouped;
    auto add = [&](int a, int b, const Monomial& rest, const PiCoefficient& c) {
      grouped[{a + b + 1, rest}].addScaled(c, betaWeight(a, b));
    };
    if (t.kind == K::NonSeparating) {
      for (const auto& st : subTerms(subs[0], 2, n)) add(st.a, st.b, st.rest, st.coeff);
    } else {
      const auto left = subTerms(subs[0], 1, n), right = subTerms(subs[1], 1, n);
      for (const auto& l : left)
        for (const auto& r : right) {
          Monomial rest = l.rest;
          for (std::size_t i = 0; i < n; ++i) rest.xexp[i] += r.rest.xexp[i];
          add(l.a, r.a, rest, l.coeff * r.coeff);
        }
    }
    for (const auto& [key, c] : grouped) {
      if (c.isZero()) continue;
      const auto& row = moments().coefficients(key.first);
      for (std::size_t j = 0; j < row.size(); ++j) {
        Monomial mono = key.second;
        mono.xexp[d] = static_cast<int>(j);
        out.addTerms(mono, c * row[j], Rational(signPow(sd, j), 4));
      }
    }
    return out;
  }

  EngineOptions opt_;
  std::shared_ptr<const MomentTable> moments_;
  mutable std::mutex mu_;
  std::map<Key, std::shared_ptr<const VolumePolynomial>> memo_;
};

}  // namespace wpcone
