#pragma once

// Exact polynomial arithmetic for volume polynomials.
//
// A VolumePolynomial lives in Q[pi^2][x_1, ..., x_N] where x_i = l_i^2 is the
// square of the i-th slot variable (a boundary length, or a cone angle once
// the slot has been relabeled by substituteImaginary). Odd powers of l_i show
// up transiently inside the recursion (l * V, d/dl V); they are carried by a
// per-slot parity bit on the monomial rather than by half-integer exponents.

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "wpcone/errors.hpp"

namespace wpcone {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

enum class SlotKind { Length, Angle };

inline const char* toString(SlotKind k) { return k == SlotKind::Length ? "length" : "angle"; }

/// Sum of r_k * pi^(2k). Zero entries are never stored.
class PiCoefficient {
 public:
  using Terms = std::map<int, Rational, std::greater<int>>;

  PiCoefficient() = default;
  PiCoefficient(int piExp, const Rational& value) { add(piExp, value); }

  void add(int piExp, const Rational& value) {
    if (piExp < 0 || piExp % 2 != 0)
      throw DomainError("pi exponent must be a non-negative even integer, got " + std::to_string(piExp));
    if (value == 0) return;
    auto [it, inserted] = terms_.try_emplace(piExp, value);
    if (!inserted) {
      it->second += value;
      if (it->second == 0) terms_.erase(it);
    }
  }

  bool isZero() const { return terms_.empty(); }
  const Terms& terms() const { return terms_; }

  PiCoefficient scaled(const Rational& s) const {
    PiCoefficient out;
    if (s == 0) return out;
    for (const auto& [e, r] : terms_) out.terms_.emplace(e, r * s);
    return out;
  }

  PiCoefficient timesPi(int piExp) const {
    PiCoefficient out;
    for (const auto& [e, r] : terms_) out.add(e + piExp, r);
    return out;
  }

  void addScaled(const PiCoefficient& other, const Rational& s) {
    for (const auto& [e, r] : other.terms_) add(e, r * s);
  }

  PiCoefficient operator*(const PiCoefficient& other) const {
    PiCoefficient out;
    for (const auto& [e1, r1] : terms_)
      for (const auto& [e2, r2] : other.terms_) out.add(e1 + e2, r1 * r2);
    return out;
  }

  double eval(double pi) const {
    double acc = 0.0;
    for (const auto& [e, r] : terms_) acc += static_cast<double>(r) * std::pow(pi, e);
    return acc;
  }

  friend bool operator==(const PiCoefficient&, const PiCoefficient&) = default;

 private:
  Terms terms_;
};

/// Exponents of x_i = l_i^2 plus a parity bit per slot for a leftover factor l_i.
struct Monomial {
  std::vector<int> xexp;
  std::uint32_t odd = 0;

  bool isOdd(std::size_t slot) const { return (odd >> slot) & 1u; }
  int lengthDegree(std::size_t slot) const { return 2 * xexp[slot] + (isOdd(slot) ? 1 : 0); }
  int xDegree() const {
    int d = 0;
    for (int e : xexp) d += e;
    return d;
  }

  void setLengthDegree(std::size_t slot, int degree) {
    xexp[slot] = degree / 2;
    if (degree % 2) odd |= (1u << slot);
    else odd &= ~(1u << slot);
  }

  friend bool operator==(const Monomial&, const Monomial&) = default;
  friend bool operator<(const Monomial& a, const Monomial& b) {
    if (a.xexp != b.xexp) return a.xexp < b.xexp;
    return a.odd < b.odd;
  }
};

/// One (monomial, pi-power, rational) entry, the unit of canonical serialization.
struct FlatTerm {
  std::vector<int> xexp;
  std::uint32_t odd = 0;
  int piExp = 0;
  Rational coeff;
};

/// Graded lexicographic, descending: total degree sum(xexp) + piExp/2, then
/// x-exponents, then pi-exponent.
inline bool canonicalBefore(const FlatTerm& a, const FlatTerm& b) {
  auto deg = [](const FlatTerm& t) {
    int d = 0;
    for (int e : t.xexp) d += 2 * e;
    return d + std::popcount(t.odd) + t.piExp;
  };
  const int da = deg(a), db = deg(b);
  if (da != db) return da > db;
  if (a.xexp != b.xexp) return a.xexp > b.xexp;
  if (a.odd != b.odd) return a.odd > b.odd;
  return a.piExp > b.piExp;
}

enum class Variable { Length, Angle };

class VolumePolynomial {
 public:
  using Terms = std::map<Monomial, PiCoefficient>;
  static constexpr std::size_t kMaxVariables = 32;

  VolumePolynomial() = default;
  explicit VolumePolynomial(std::size_t numVariables)
      : VolumePolynomial(std::vector<SlotKind>(numVariables, SlotKind::Length)) {}
  explicit VolumePolynomial(std::vector<SlotKind> kinds) : kinds_(std::move(kinds)) {
    if (kinds_.size() > kMaxVariables)
      throw DomainError("at most " + std::to_string(kMaxVariables) + " slots are supported");
  }

  static VolumePolynomial constant(std::vector<SlotKind> kinds, const Rational& value, int piExp = 0) {
    VolumePolynomial p(std::move(kinds));
    p.addTerm(Monomial{std::vector<int>(p.numVariables(), 0), 0}, piExp, value);
    return p;
  }
  static VolumePolynomial constant(std::size_t n, const Rational& value, int piExp = 0) {
    return constant(std::vector<SlotKind>(n, SlotKind::Length), value, piExp);
  }

  /// x_slot = l_slot^2
  static VolumePolynomial slotSquare(std::vector<SlotKind> kinds, std::size_t slot) {
    VolumePolynomial p(std::move(kinds));
    p.checkSlot(slot);
    Monomial m{std::vector<int>(p.numVariables(), 0), 0};
    m.xexp[slot] = 1;
    p.addTerm(m, 0, 1);
    return p;
  }
  static VolumePolynomial slotSquare(std::size_t n, std::size_t slot) {
    return slotSquare(std::vector<SlotKind>(n, SlotKind::Length), slot);
  }

  std::size_t numVariables() const { return kinds_.size(); }
  const std::vector<SlotKind>& kinds() const { return kinds_; }
  SlotKind kind(std::size_t slot) const {
    checkSlot(slot);
    return kinds_[slot];
  }
  const Terms& terms() const { return terms_; }
  bool isZero() const { return terms_.empty(); }
  std::size_t termCount() const {
    std::size_t c = 0;
    for (const auto& [m, pc] : terms_) c += pc.terms().size();
    return c;
  }

  void addTerm(const Monomial& m, int piExp, const Rational& value) {
    if (m.xexp.size() != numVariables())
      throw DomainError("monomial has " + std::to_string(m.xexp.size()) + " exponents, polynomial has " +
                        std::to_string(numVariables()) + " slots");
    for (int e : m.xexp)
      if (e < 0) throw DomainError("negative exponent in monomial");
    if (value == 0) return;
    auto& pc = terms_[m];
    pc.add(piExp, value);
    if (pc.isZero()) terms_.erase(m);
  }

  void addTerms(const Monomial& m, const PiCoefficient& pc, const Rational& scale = 1) {
    if (pc.isZero() || scale == 0) return;
    auto& dst = terms_[m];
    dst.addScaled(pc, scale);
    if (dst.isZero()) terms_.erase(m);
  }

  /// Same terms, different slot labels (count must match).
  VolumePolynomial withKinds(std::vector<SlotKind> kinds) const {
    if (kinds.size() != numVariables()) throw DomainError("slot relabeling changes the variable count");
    VolumePolynomial p = *this;
    p.kinds_ = std::move(kinds);
    return p;
  }

  VolumePolynomial& operator+=(const VolumePolynomial& other) {
    requireCompatible(other);
    for (const auto& [m, pc] : other.terms_) addTerms(m, pc);
    return *this;
  }
  VolumePolynomial& operator-=(const VolumePolynomial& other) {
    requireCompatible(other);
    for (const auto& [m, pc] : other.terms_) addTerms(m, pc, -1);
    return *this;
  }
  friend VolumePolynomial operator+(VolumePolynomial a, const VolumePolynomial& b) { return a += b; }
  friend VolumePolynomial operator-(VolumePolynomial a, const VolumePolynomial& b) { return a -= b; }
  VolumePolynomial operator-() const { return scaled(-1); }

  VolumePolynomial scaled(const Rational& s) const {
    VolumePolynomial out(kinds_);
    if (s == 0) return out;
    for (const auto& [m, pc] : terms_) out.terms_.emplace(m, pc.scaled(s));
    return out;
  }

  VolumePolynomial timesPi(int piExp) const {
    VolumePolynomial out(kinds_);
    for (const auto& [m, pc] : terms_) out.terms_.emplace(m, pc.timesPi(piExp));
    return out;
  }

  friend VolumePolynomial operator*(const VolumePolynomial& a, const VolumePolynomial& b) {
    a.requireCompatible(b);
    VolumePolynomial out(a.kinds_);
    for (const auto& [ma, pa] : a.terms_) {
      for (const auto& [mb, pb] : b.terms_) {
        Monomial m{ma.xexp, 0};
        for (std::size_t i = 0; i < m.xexp.size(); ++i) m.setLengthDegree(i, ma.lengthDegree(i) + mb.lengthDegree(i));
        out.addTerms(m, pa * pb);
      }
    }
    return out;
  }

  /// l_slot = i*theta: x_slot -> -x_slot and the slot flips between length and angle.
  VolumePolynomial substituteImaginary(std::size_t slot) const {
    checkSlot(slot);
    std::vector<SlotKind> kinds = kinds_;
    kinds[slot] = kinds[slot] == SlotKind::Length ? SlotKind::Angle : SlotKind::Length;
    VolumePolynomial out(std::move(kinds));
    for (const auto& [m, pc] : terms_) {
      if (m.isOdd(slot))
        throw InvariantError("substituteImaginary: odd power of slot " + std::to_string(slot) +
                             " would leave an imaginary coefficient");
      out.terms_.emplace(m, m.xexp[slot] % 2 ? pc.scaled(-1) : pc);
    }
    return out;
  }

  /// Substitute x_i = values_i^2 (times values_i for odd parity) and pi = piValue.
  double evalNumeric(std::span<const double> values, double piValue) const {
    if (values.size() != numVariables())
      throw DomainError("evalNumeric: expected " + std::to_string(numVariables()) + " values, got " +
                        std::to_string(values.size()));
    for (double v : values)
      if (!(v >= 0.0)) throw DomainError("evalNumeric: slot values must be non-negative");
    double acc = 0.0;
    for (const auto& [m, pc] : terms_) {
      double mono = 1.0;
      for (std::size_t i = 0; i < values.size(); ++i) mono *= std::pow(values[i], m.lengthDegree(i));
      acc += mono * pc.eval(piValue);
    }
    return acc;
  }

  /// Evaluate at complex slot values (l_i arbitrary complex, x_i = l_i^2).
  std::complex<double> evalComplex(std::span<const std::complex<double>> values, double piValue) const {
    if (values.size() != numVariables()) throw DomainError("evalComplex: slot count mismatch");
    std::complex<double> acc = 0.0;
    for (const auto& [m, pc] : terms_) {
      std::complex<double> mono = 1.0;
      for (std::size_t i = 0; i < values.size(); ++i) {
        for (int k = 0; k < m.lengthDegree(i); ++k) mono *= values[i];
      }
      acc += mono * pc.eval(piValue);
    }
    return acc;
  }

  /// Formal derivative in the slot's own variable (l or theta).
  VolumePolynomial partialDerivative(std::size_t slot, Variable wrt) const {
    checkSlot(slot);
    const SlotKind expected = wrt == Variable::Length ? SlotKind::Length : SlotKind::Angle;
    if (kinds_[slot] != expected)
      throw DomainError("partialDerivative: slot " + std::to_string(slot) + " is a " + toString(kinds_[slot]) +
                        " slot");
    VolumePolynomial out(kinds_);
    for (const auto& [m, pc] : terms_) {
      const int d = m.lengthDegree(slot);
      if (d == 0) continue;
      Monomial dm = m;
      dm.setLengthDegree(slot, d - 1);
      out.addTerms(dm, pc, d);
    }
    return out;
  }

  /// l_slot * p
  VolumePolynomial multiplyBySlot(std::size_t slot) const {
    checkSlot(slot);
    VolumePolynomial out(kinds_);
    for (const auto& [m, pc] : terms_) {
      Monomial mm = m;
      mm.setLengthDegree(slot, m.lengthDegree(slot) + 1);
      out.terms_.emplace(mm, pc);
    }
    return out;
  }

  /// p / l_slot; every term must contain l_slot.
  VolumePolynomial divideBySlot(std::size_t slot) const {
    checkSlot(slot);
    VolumePolynomial out(kinds_);
    for (const auto& [m, pc] : terms_) {
      const int d = m.lengthDegree(slot);
      if (d == 0)
        throw InvariantError("divideBySlot: nonzero residue, a term is constant in slot " + std::to_string(slot));
      Monomial mm = m;
      mm.setLengthDegree(slot, d - 1);
      out.terms_.emplace(mm, pc);
    }
    return out;
  }

  /// Antiderivative in l_slot with zero constant term.
  VolumePolynomial antiderivative(std::size_t slot) const {
    checkSlot(slot);
    VolumePolynomial out(kinds_);
    for (const auto& [m, pc] : terms_) {
      const int d = m.lengthDegree(slot);
      Monomial mm = m;
      mm.setLengthDegree(slot, d + 1);
      out.addTerms(mm, pc, Rational(1, d + 1));
    }
    return out;
  }

  /// Sets slot to zero and keeps the variable (so slot count is preserved).
  VolumePolynomial atZero(std::size_t slot) const {
    checkSlot(slot);
    VolumePolynomial out(kinds_);
    for (const auto& [m, pc] : terms_)
      if (m.lengthDegree(slot) == 0) out.terms_.emplace(m, pc);
    return out;
  }

  /// New slot i reads old slot perm[i].
  VolumePolynomial permuted(std::span<const std::size_t> perm) const {
    if (perm.size() != numVariables()) throw DomainError("permutation size mismatch");
    std::vector<SlotKind> kinds(numVariables());
    for (std::size_t i = 0; i < perm.size(); ++i) kinds[i] = kind(perm[i]);
    VolumePolynomial out(std::move(kinds));
    for (const auto& [m, pc] : terms_) {
      Monomial mm{std::vector<int>(numVariables(), 0), 0};
      for (std::size_t i = 0; i < perm.size(); ++i) mm.setLengthDegree(i, m.lengthDegree(perm[i]));
      out.terms_.emplace(mm, pc);
    }
    return out;
  }

  bool isEvenIn(std::size_t slot) const {
    checkSlot(slot);
    return std::none_of(terms_.begin(), terms_.end(), [&](const auto& t) { return t.first.isOdd(slot); });
  }
  bool isEven() const {
    return std::all_of(terms_.begin(), terms_.end(), [](const auto& t) { return t.first.odd == 0; });
  }

  /// Every term satisfies sum(xexp) + piExp/2 == degree (requires an even polynomial).
  bool isHomogeneous(int degree) const {
    for (const auto& [m, pc] : terms_) {
      if (m.odd != 0) return false;
      for (const auto& [e, r] : pc.terms())
        if (m.xDegree() + e / 2 != degree) return false;
    }
    return true;
  }

  std::vector<FlatTerm> flatTerms() const {
    std::vector<FlatTerm> out;
    for (const auto& [m, pc] : terms_)
      for (const auto& [e, r] : pc.terms()) out.push_back(FlatTerm{m.xexp, m.odd, e, r});
    std::sort(out.begin(), out.end(), canonicalBefore);
    return out;
  }

  friend bool operator==(const VolumePolynomial&, const VolumePolynomial&) = default;

 private:
  void checkSlot(std::size_t slot) const {
    if (slot >= numVariables())
      throw DomainError("slot " + std::to_string(slot) + " out of range for " + std::to_string(numVariables()) +
                        "-slot polynomial");
  }
  void requireCompatible(const VolumePolynomial& other) const {
    if (other.numVariables() != numVariables())
      throw DomainError("variable-count mismatch: " + std::to_string(numVariables()) + " vs " +
                        std::to_string(other.numVariables()));
    if (other.kinds_ != kinds_) throw DomainError("slot-kind mismatch between operands");
  }

  std::vector<SlotKind> kinds_;
  Terms terms_;
};

inline VolumePolynomial polyAdd(const VolumePolynomial& a, const VolumePolynomial& b) { return a + b; }
inline VolumePolynomial polyMul(const VolumePolynomial& a, const VolumePolynomial& b) { return a * b; }
inline VolumePolynomial substituteImaginary(const VolumePolynomial& p, std::size_t slot) {
  return p.substituteImaginary(slot);
}
inline double evalNumeric(const VolumePolynomial& p, std::span<const double> values, double piValue) {
  return p.evalNumeric(values, piValue);
}
inline VolumePolynomial partialDerivative(const VolumePolynomial& p, std::size_t slot, Variable wrt) {
  return p.partialDerivative(slot, wrt);
}

/// Re-index p (over src slots) into a polynomial over `kinds`, sending source slot i to target slot map[i].
inline VolumePolynomial embed(const VolumePolynomial& p, std::vector<SlotKind> kinds,
                              std::span<const std::size_t> map) {
  if (map.size() != p.numVariables()) throw DomainError("embed: map size mismatch");
  VolumePolynomial out(std::move(kinds));
  for (std::size_t i = 0; i < map.size(); ++i) {
    if (map[i] >= out.numVariables()) throw DomainError("embed: target slot out of range");
    for (std::size_t j = 0; j < i; ++j)
      if (map[j] == map[i]) throw DomainError("embed: map is not injective");
  }
  for (const auto& [m, pc] : p.terms()) {
    Monomial mm{std::vector<int>(out.numVariables(), 0), 0};
    for (std::size_t i = 0; i < map.size(); ++i) mm.setLengthDegree(map[i], m.lengthDegree(i));
    out.addTerms(mm, pc);
  }
  return out;
}

}  // namespace wpcone
