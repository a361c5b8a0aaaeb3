#pragma once

// Canonical text forms of a VolumePolynomial: JSON, LaTeX and plain text.
// All three walk flatTerms(), so they share the graded-lex order.

#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "wpcone/polyalg.hpp"

namespace wpcone {

inline std::string rationalToString(const Rational& r) {
  const BigInt num = boost::multiprecision::numerator(r);
  const BigInt den = boost::multiprecision::denominator(r);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

inline Rational parseRational(const std::string& s) {
  try {
    const auto slash = s.find('/');
    if (slash == std::string::npos) return Rational(BigInt(s));
    const BigInt num(s.substr(0, slash));
    const BigInt den(s.substr(slash + 1));
    if (den == 0) throw DomainError("zero denominator in coefficient \"" + s + "\"");
    return Rational(num, den);
  } catch (const std::runtime_error&) {
    throw DomainError("malformed rational coefficient \"" + s + "\"");
  }
}

/// Display names: length slots are l_1, l_2, ... and angle slots theta_1, ... in slot order.
inline std::vector<std::string> slotNames(const std::vector<SlotKind>& kinds, bool latex) {
  std::vector<std::string> names;
  int lengths = 0, angles = 0;
  for (SlotKind k : kinds) {
    if (k == SlotKind::Length)
      names.push_back((latex ? "\\ell_" : "l_") + std::to_string(++lengths));
    else
      names.push_back((latex ? "\\theta_" : "theta_") + std::to_string(++angles));
  }
  return names;
}

inline nlohmann::json toJson(const VolumePolynomial& p) {
  if (!p.isEven()) throw InvariantError("only polynomials even in every slot have a canonical JSON form");
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& t : p.flatTerms()) {
    terms.push_back({{"xexp", t.xexp}, {"piexp", t.piExp}, {"coeff", rationalToString(t.coeff)}});
  }
  return {{"vars", p.numVariables()}, {"terms", std::move(terms)}};
}

inline VolumePolynomial fromJson(const nlohmann::json& j, std::vector<SlotKind> kinds = {}) {
  if (!j.is_object() || !j.contains("vars") || !j.contains("terms") || !j["terms"].is_array())
    throw DomainError("polynomial JSON needs \"vars\" and a \"terms\" array");
  const auto n = j["vars"].get<std::size_t>();
  if (kinds.empty()) kinds.assign(n, SlotKind::Length);
  if (kinds.size() != n) throw DomainError("slot kinds do not match \"vars\"");
  VolumePolynomial p(std::move(kinds));
  for (const auto& t : j["terms"]) {
    auto xexp = t.at("xexp").get<std::vector<int>>();
    if (xexp.size() != n) throw DomainError("term exponent vector length differs from \"vars\"");
    p.addTerm(Monomial{std::move(xexp), 0}, t.at("piexp").get<int>(), parseRational(t.at("coeff").get<std::string>()));
  }
  return p;
}

namespace detail {

inline std::string powerLatex(const std::string& base, int e) {
  if (e == 1) return base;
  const std::string es = std::to_string(e);
  return base + "^" + (es.size() > 1 ? "{" + es + "}" : es);
}

inline std::string powerText(const std::string& base, int e) {
  return e == 1 ? base : base + "^" + std::to_string(e);
}

}  // namespace detail

/// e.g. "-\frac{\theta_1^2}{48}+\frac{\pi^2}{12}"
inline std::string toLatex(const VolumePolynomial& p) {
  const auto terms = p.flatTerms();
  if (terms.empty()) return "0";
  const auto names = slotNames(p.kinds(), true);
  std::ostringstream out;
  bool first = true;
  for (const auto& t : terms) {
    const BigInt num = boost::multiprecision::numerator(t.coeff);
    const BigInt den = boost::multiprecision::denominator(t.coeff);
    const BigInt absNum = num < 0 ? BigInt(-num) : num;
    std::string vars;
    if (t.piExp > 0) vars += detail::powerLatex("\\pi", t.piExp);
    for (std::size_t i = 0; i < t.xexp.size(); ++i) {
      const int d = 2 * t.xexp[i] + ((t.odd >> i) & 1u);
      if (d > 0) vars += detail::powerLatex(names[i], d);
    }
    std::string numer = vars.empty() ? absNum.str() : (absNum == 1 ? vars : absNum.str() + vars);
    if (num < 0) out << "-";
    else if (!first) out << "+";
    if (den == 1) out << numer;
    else out << "\\frac{" << numer << "}{" << den.str() << "}";
    first = false;
  }
  return out.str();
}

/// e.g. "-1/48*theta_1^2 + 1/12*pi^2"
inline std::string toText(const VolumePolynomial& p) {
  const auto terms = p.flatTerms();
  if (terms.empty()) return "0";
  const auto names = slotNames(p.kinds(), false);
  std::ostringstream out;
  bool first = true;
  for (const auto& t : terms) {
    const bool negative = t.coeff < 0;
    const Rational mag = negative ? Rational(-t.coeff) : t.coeff;
    std::vector<std::string> factors;
    if (t.piExp > 0) factors.push_back(detail::powerText("pi", t.piExp));
    for (std::size_t i = 0; i < t.xexp.size(); ++i) {
      const int d = 2 * t.xexp[i] + ((t.odd >> i) & 1u);
      if (d > 0) factors.push_back(detail::powerText(names[i], d));
    }
    if (first) out << (negative ? "-" : "");
    else out << (negative ? " - " : " + ");
    std::string body;
    if (factors.empty() || mag != 1) body = rationalToString(mag);
    for (const auto& f : factors) body += (body.empty() ? "" : "*") + f;
    out << body;
    first = false;
  }
  return out.str();
}

}  // namespace wpcone
