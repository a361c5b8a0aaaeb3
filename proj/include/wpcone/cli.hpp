#pragma once

// Command-line front end. run() never throws: exit 0 on success, 2 on invalid
// input, 1 on an internal failure or a failed verification.

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "wpcone/conepoints.hpp"
#include "wpcone/errors.hpp"
#include "wpcone/format.hpp"
#include "wpcone/kernels.hpp"
#include "wpcone/mcshane.hpp"
#include "wpcone/numeric_recursion.hpp"
#include "wpcone/recursion.hpp"

namespace wpcone::cli {

enum class Format { Json, Latex, Text, Csv };

inline Format parseFormat(const std::string& s) {
  if (s == "json") return Format::Json;
  if (s == "latex") return Format::Latex;
  if (s == "text") return Format::Text;
  if (s == "csv") return Format::Csv;
  throw DomainError("unknown format \"" + s + "\" (expected json, latex, text or csv)");
}

/// "1.2", "pi", "pi/2", "3pi/4", "0.5*pi". Plain numbers are degrees when `degrees` is set.
inline double parseAngle(std::string s, bool degrees) {
  s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); }), s.end());
  auto number = [&](const std::string& t) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(t, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != t.size() || t.empty()) throw DomainError("cannot parse angle \"" + s + "\"");
    return v;
  };
  const auto at = s.find("pi");
  if (at == std::string::npos) {
    const double v = number(s);
    return degrees ? v * std::numbers::pi / 180.0 : v;
  }
  std::string coef = s.substr(0, at), rest = s.substr(at + 2);
  if (!coef.empty() && coef.back() == '*') coef.pop_back();
  double v = std::numbers::pi * (coef.empty() ? 1.0 : coef == "-" ? -1.0 : number(coef));
  if (!rest.empty()) {
    if (rest[0] != '/') throw DomainError("cannot parse angle \"" + s + "\"");
    v /= number(rest.substr(1));
  }
  return v;
}

inline double parseLength(const std::string& s) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw DomainError("cannot parse length \"" + s + "\"");
  return v;
}

struct Settings {
  int maxGenus = 5;
  int maxSlots = 8;
  unsigned threads = 1;
  double tol = 0;  // 0: each verify suite uses its own default
};

/// key = value lines; '#' starts a comment.
inline std::map<std::string, std::string> readConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open config file \"" + path + "\"");
  std::map<std::string, std::string> kv;
  std::string line;
  int lineNo = 0;
  auto trim = [](std::string t) {
    const auto b = t.find_first_not_of(" \t\r"), e = t.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : t.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineNo;
    if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw DomainError(path + ":" + std::to_string(lineNo) + ": expected key = value");
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    kv[trim(line.substr(0, eq))] = value;
  }
  return kv;
}

inline int parseCount(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const int n = std::stoi(v, &used);
    if (used == v.size() && n >= 0) return n;
  } catch (const std::exception&) {
  }
  throw DomainError(key + " must be a non-negative integer, got \"" + v + "\"");
}

inline std::string csvPolynomial(const VolumePolynomial& p) {
  std::ostringstream out;
  for (const auto& name : slotNames(p.kinds(), false)) out << name << ",";
  out << "pi,coeff\n";
  for (const auto& t : p.flatTerms()) {
    for (std::size_t i = 0; i < t.xexp.size(); ++i) out << 2 * t.xexp[i] + ((t.odd >> i) & 1u) << ",";
    out << t.piExp << "," << rationalToString(t.coeff) << "\n";
  }
  return out.str();
}

inline nlohmann::json signatureJson(const SurfaceSignature& s) { return {{"g", s.g}, {"m", s.m}, {"n", s.n}}; }

inline std::string formatDouble(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

inline std::string renderPolynomial(const SurfaceSignature& sig, const VolumePolynomial& p, Format f) {
  switch (f) {
    case Format::Latex: return toLatex(p) + "\n";
    case Format::Text: return toText(p) + "\n";
    case Format::Csv: return csvPolynomial(p);
    case Format::Json: {
      nlohmann::json j{{"signature", signatureJson(sig)}, {"slots", slotNames(p.kinds(), false)}, {"polynomial", toJson(p)}};
      return j.dump(2) + "\n";
    }
  }
  return {};
}

/// All stable (g, m, n) with g <= gMax and m + n <= slotMax, ordered by (g, m + n, n).
inline std::vector<SurfaceSignature> tableSignatures(int gMax, int slotMax) {
  std::vector<SurfaceSignature> out;
  for (int g = 0; g <= gMax; ++g)
    for (int total = 0; total <= slotMax; ++total)
      for (int n = 0; n <= total; ++n) {
        SurfaceSignature s{g, total - n, n};
        if (s.stable()) out.push_back(s);
      }
  return out;
}

inline std::string emitTable(VolumeEngine& engine, int gMax, int slotMax, Format f) {
  if (gMax < 0 || slotMax < 0) throw DomainError("table bounds must be non-negative");
  if (gMax > engine.options().maxGenus)
    throw DomainError("gmax " + std::to_string(gMax) + " exceeds the genus cap " + std::to_string(engine.options().maxGenus));
  if (slotMax > engine.options().maxSlots)
    throw DomainError("slotmax " + std::to_string(slotMax) + " exceeds the slot cap " +
                      std::to_string(engine.options().maxSlots));
  std::ostringstream out;
  nlohmann::json rows = nlohmann::json::array();
  if (f == Format::Csv) out << "g,m,n,volume\n";
  if (f == Format::Latex) out << "\\begin{array}{ll}\n";
  for (const auto& s : tableSignatures(gMax, slotMax)) {
    const auto p = engine.computeVolume(s);
    switch (f) {
      case Format::Json: rows.push_back({{"signature", signatureJson(s)}, {"polynomial", toJson(p)}}); break;
      case Format::Text: out << "V" << s.str() << " = " << toText(p) << "\n"; break;
      case Format::Csv: out << s.g << "," << s.m << "," << s.n << ",\"" << toText(p) << "\"\n"; break;
      case Format::Latex:
        out << "V_{" << s.g << "," << s.m << "," << s.n << "} & " << toLatex(p) << " \\\\\n";
        break;
    }
  }
  if (f == Format::Latex) out << "\\end{array}\n";
  if (f == Format::Json) out << rows.dump(2) << "\n";
  return out.str();
}

struct Check {
  std::string name;
  double value;
  double expected;
  double error;
  bool pass;
};

inline std::string renderChecks(const std::string& title, const std::vector<Check>& checks, double tol, Format f) {
  bool ok = std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
  std::ostringstream out;
  if (f == Format::Json) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& c : checks)
      rows.push_back({{"case", c.name}, {"value", c.value}, {"expected", c.expected}, {"error", c.error}, {"pass", c.pass}});
    out << nlohmann::json{{"check", title}, {"tolerance", tol}, {"pass", ok}, {"cases", rows}}.dump(2) << "\n";
  } else if (f == Format::Csv) {
    out << "case,value,expected,error,pass\n";
    for (const auto& c : checks)
      out << c.name << "," << formatDouble(c.value) << "," << formatDouble(c.expected) << "," << formatDouble(c.error)
          << "," << (c.pass ? "true" : "false") << "\n";
  } else {
    out << "# " << title << " (tolerance " << tol << ")\n";
    for (const auto& c : checks)
      out << (c.pass ? "ok    " : "FAIL  ") << c.name << "  value " << formatDouble(c.value) << "  expected "
          << formatDouble(c.expected) << "  error " << std::setprecision(3) << c.error << "\n";
  }
  return out.str();
}

inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Volumes of moduli spaces of hyperbolic surfaces with boundaries and cone points", "wpcone"};
  app.require_subcommand(1);
  std::string configPath, format = "text";
  int threadsFlag = -1, maxGenusFlag = -1, maxSlotsFlag = -1;
  app.add_option("--config", configPath, "key = value file (max-genus, max-slots, threads, tol)");
  app.add_option("--threads", threadsFlag, "worker threads for the recursion and tree enumeration");
  app.add_option("--max-genus", maxGenusFlag, "genus cap (also WPCONE_MAX_GENUS)");
  app.add_option("--max-slots", maxSlotsFlag, "cap on boundaries + cones");
  auto addFormat = [&](CLI::App* sub) {
    sub->add_option("--format", format, "json, latex, text or csv")->capture_default_str();
  };

  int g = 0, m = 0, n = 0, cone = 1;
  bool degrees = false;
  std::vector<std::string> lengthArgs, angleArgs;
  auto addSignature = [&](CLI::App* sub) {
    sub->add_option("--g", g, "genus")->required();
    sub->add_option("--boundaries", m, "number of geodesic boundaries");
    sub->add_option("--cones", n, "number of cone points");
  };

  auto* volume = app.add_subcommand("volume", "volume polynomial, or its value at given lengths and angles");
  addSignature(volume);
  volume->add_option("--lengths", lengthArgs, "boundary lengths")->delimiter(',');
  volume->add_option("--angles", angleArgs, "cone angles in (0, pi]; accepts pi, pi/2, 3pi/4")->delimiter(',');
  volume->add_flag("--degrees", degrees, "read plain angle numbers as degrees");
  addFormat(volume);

  int gMax = 1, slotMax = 3;
  auto* table = app.add_subcommand("table", "volume polynomials of all stable signatures within bounds");
  table->add_option("--gmax", gMax, "largest genus")->capture_default_str();
  table->add_option("--slotmax", slotMax, "largest boundaries + cones")->capture_default_str();
  addFormat(table);

  auto* cusp = app.add_subcommand("cusp-limit", "volume with one cone angle sent to 0");
  addSignature(cusp);
  cusp->add_option("--cone", cone, "which cone point (1-based)")->capture_default_str();
  addFormat(cusp);

  auto* verify = app.add_subcommand("verify", "numerical verification suites");
  verify->require_subcommand(1);

  std::string thetaArg, lengthArg;
  bool cuspHole = false;
  std::vector<double> cutoffs;
  double cutoff = 40, tol = -1;
  auto* vMcshane = verify->add_subcommand("mcshane", "McShane sum over simple closed geodesics of a one-holed torus");
  vMcshane->add_option("--theta", thetaArg, "cone angle of the hole");
  vMcshane->add_option("--length", lengthArg, "boundary length of the hole");
  vMcshane->add_flag("--cusp", cuspHole, "the hole is a cusp");
  vMcshane->add_option("--cutoff", cutoff, "largest geodesic length")->capture_default_str();
  vMcshane->add_option("--cutoffs", cutoffs, "intermediate cutoffs to report")->delimiter(',');
  vMcshane->add_option("--tol", tol, "required final residual (default 1e-6)");
  vMcshane->add_flag("--degrees", degrees, "read a plain angle number as degrees");
  addFormat(vMcshane);

  std::vector<std::string> thetaList;
  auto* vKernel = verify->add_subcommand("kernel", "quadrature against the exact kernel moments");
  vKernel->add_option("--theta", thetaList, "angles for the contour value")->delimiter(',');
  vKernel->add_option("--tol", tol, "tolerance (default 1e-9)");
  vKernel->add_flag("--degrees", degrees, "read plain angle numbers as degrees");
  addFormat(vKernel);

  int points = 20;
  auto* vIdentity = verify->add_subcommand("identity", "theta * V(theta) = int x D(theta, x, x) dx on the one-cone torus");
  vIdentity->add_option("--theta", thetaList, "angles (default: an even grid on (0, pi])")->delimiter(',');
  vIdentity->add_option("--points", points, "grid size when no angles are given")->capture_default_str();
  vIdentity->add_option("--tol", tol, "tolerance (default 1e-8)");
  vIdentity->add_flag("--degrees", degrees, "read plain angle numbers as degrees");
  addFormat(vIdentity);

  int samples = 30;
  unsigned seed = 1;
  auto* vRecursion = verify->add_subcommand("recursion", "symbolic volume against the numeric-kernel recursion");
  addSignature(vRecursion);
  vRecursion->add_option("--samples", samples, "random evaluation points")->capture_default_str();
  vRecursion->add_option("--seed", seed, "random seed")->capture_default_str();
  vRecursion->add_option("--tol", tol, "relative tolerance (default 1e-8)");
  addFormat(vRecursion);

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    Settings st;
    if (const char* env = std::getenv("WPCONE_MAX_GENUS")) st.maxGenus = parseCount("WPCONE_MAX_GENUS", env);
    if (!configPath.empty()) {
      for (const auto& [k, v] : readConfig(configPath)) {
        if (k == "max-genus") st.maxGenus = parseCount(k, v);
        else if (k == "max-slots") st.maxSlots = parseCount(k, v);
        else if (k == "threads") st.threads = static_cast<unsigned>(parseCount(k, v));
        else if (k == "tol") st.tol = parseLength(v);
        else throw DomainError("unknown config key \"" + k + "\"");
      }
    }
    if (maxGenusFlag >= 0) st.maxGenus = maxGenusFlag;
    if (maxSlotsFlag >= 0) st.maxSlots = maxSlotsFlag;
    if (threadsFlag >= 0) st.threads = static_cast<unsigned>(threadsFlag);
    const Format fmt = parseFormat(format);
    VolumeEngine engine(EngineOptions{st.maxGenus, st.maxSlots, std::max(1u, st.threads), true});
    const SurfaceSignature sig{g, m, n};

    if (volume->parsed()) {
      ConeSurfaceSpec spec{sig, std::nullopt, {}};
      for (const auto& a : angleArgs) spec.coneAngles.push_back(parseAngle(a, degrees));
      if (!lengthArgs.empty()) {
        spec.boundaryLengths.emplace();
        for (const auto& l : lengthArgs) spec.boundaryLengths->push_back(parseLength(l));
      }
      const bool numeric = !angleArgs.empty() || !lengthArgs.empty();
      if (!numeric) {
        out << renderPolynomial(sig, volumePolynomial(engine, spec), fmt);
        return 0;
      }
      if (sig.m == 0) spec.boundaryLengths.emplace();
      const double v = volumeValue(engine, spec);
      if (fmt == Format::Json)
        out << nlohmann::json{{"signature", signatureJson(sig)}, {"value", v}}.dump(2) << "\n";
      else
        out << formatDouble(v) << "\n";
      return 0;
    }

    if (table->parsed()) {
      out << emitTable(engine, gMax, slotMax, fmt);
      return 0;
    }

    if (cusp->parsed()) {
      if (cone < 1) throw DomainError("--cone is 1-based");
      out << renderPolynomial(sig, cuspLimitCheck(engine, sig, static_cast<std::size_t>(cone - 1)), fmt);
      return 0;
    }

    if (vMcshane->parsed()) {
      const int chosen = (!thetaArg.empty()) + (!lengthArg.empty()) + cuspHole;
      if (chosen != 1) throw DomainError("give exactly one of --theta, --length, --cusp");
      BoundaryLabel hole = BoundaryLabel::cusp();
      if (!thetaArg.empty()) {
        const double theta = parseAngle(thetaArg, degrees);
        if (theta > std::numbers::pi) validateConeAngle(theta);
        hole = BoundaryLabel::cone(theta);
      } else if (!lengthArg.empty()) {
        hole = BoundaryLabel::geodesic(parseLength(lengthArg));
      }
      if (!(cutoff > 0)) throw DomainError("--cutoff must be positive");
      std::vector<double> cuts;
      for (double c : cutoffs)
        if (c < cutoff) cuts.push_back(c);
      if (cutoffs.empty())
        for (double c = 10; c < cutoff; c += 5) cuts.push_back(c);
      cuts.push_back(cutoff);
      EnumerationOptions eo;
      eo.threads = std::max(1u, st.threads);
      const auto rep = mcshaneSum(hole, cuts, eo);
      const double need = tol > 0 ? tol : st.tol > 0 ? st.tol : 1e-6;
      const bool pass = rep.finalResidual() < need;
      if (fmt == Format::Json) {
        auto j = rep.toJson();
        j["tolerance"] = need;
        j["pass"] = pass;
        out << j.dump(2) << "\n";
      } else if (fmt == Format::Csv) {
        out << "cutoff,count,sum,residual\n";
        for (const auto& p : rep.partialSums)
          out << p.cutoff << "," << p.count << "," << formatDouble(static_cast<double>(p.sum)) << ","
              << formatDouble(static_cast<double>(p.residual)) << "\n";
      } else {
        out << rep.toTable() << (pass ? "ok" : "FAIL") << ": final residual "
            << static_cast<double>(rep.finalResidual()) << " vs " << need << "\n";
      }
      return pass ? 0 : 1;
    }

    if (vKernel->parsed()) {
      const double need = tol > 0 ? tol : st.tol > 0 ? st.tol : 1e-9;
      std::vector<double> thetas;
      for (const auto& t : thetaList) {
        thetas.push_back(parseAngle(t, degrees));
        requireAngle(thetas.back());
      }
      if (thetas.empty()) thetas = {0.1, 0.5, 1.0, 2.0, std::numbers::pi};
      std::vector<Check> checks;
      QuadratureOptions q;
      q.tol = 1e-12;
      for (double th : thetas) {
        const double v =
            quadratureOracle([th](double x) { return x > 0 ? x * kernelDerivativeH(th, x) : 0.0; }, 0.0, q).value;
        const double e = std::numbers::pi * std::numbers::pi / 6 - th * th / 8;
        checks.push_back({"contour theta=" + formatDouble(th), v, e, std::abs(v - e), std::abs(v - e) <= need});
      }
      const MomentTable table(6);
      QuadratureOptions qr;
      qr.tol = 1e-13;
      qr.relative = true;
      for (int k = 0; k <= 6; ++k)
        for (double t : {0.0, 0.7, 2.5, 6.0}) {
          const double exact = momentIntegralValue(k, t, table).real();
          const double v = quadratureOracle(
                               [&](double x) { return std::pow(x, 2 * k + 1) * pairKernel(x, t).real(); }, 0.0, qr)
                               .value;
          const double e = std::abs(v - exact) / std::max(1.0, std::abs(exact));
          checks.push_back({"moment k=" + std::to_string(k) + " t=" + formatDouble(t), v, exact, e, e <= need});
        }
      out << renderChecks("kernel moments", checks, need, fmt);
      return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; }) ? 0 : 1;
    }

    if (vIdentity->parsed()) {
      const double need = tol > 0 ? tol : st.tol > 0 ? st.tol : 1e-8;
      std::vector<double> thetas;
      for (const auto& t : thetaList) thetas.push_back(parseAngle(t, degrees));
      if (thetas.empty()) {
        if (points < 1) throw DomainError("--points must be positive");
        for (int i = 1; i <= points; ++i) thetas.push_back(std::numbers::pi * i / points);
      }
      std::vector<Check> checks;
      const auto exact = engine.computeVolume({1, 0, 1});
      for (double th : thetas) {
        validateConeAngle(th);
        const double v = integrateVolumeIdentity(th);
        const double e = exact.evalNumeric(std::vector<double>{th}, std::numbers::pi);
        checks.push_back({"theta=" + formatDouble(th), v, e, std::abs(v - e), std::abs(v - e) <= need});
      }
      out << renderChecks("one-cone torus volume identity", checks, need, fmt);
      return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; }) ? 0 : 1;
    }

    if (vRecursion->parsed()) {
      const double need = tol > 0 ? tol : st.tol > 0 ? st.tol : 1e-8;
      if (sig.totalSlots() == 0) throw DomainError("recursion check needs at least one boundary or cone");
      if (samples < 1) throw DomainError("--samples must be positive");
      const auto exact = engine.computeVolume(sig);
      if (engine.directVolume(sig) != exact) throw InvariantError("direct cone recursion disagrees with substitution");
      NumericRecursion numeric(engine);
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> len(0.1, 6.0), ang(0.05, std::numbers::pi);
      std::vector<Check> checks;
      for (int s = 0; s < samples; ++s) {
        std::vector<double> pt;
        std::string name;
        for (int i = 0; i < sig.m; ++i) pt.push_back(len(rng));
        for (int i = 0; i < sig.n; ++i) pt.push_back(ang(rng));
        for (double v : pt) name += (name.empty() ? "" : ",") + formatDouble(v);
        const double e = exact.evalNumeric(pt, std::numbers::pi);
        const double v = numeric.volume(sig, pt);
        const double rel = std::abs(v - e) / std::abs(e);
        checks.push_back({"(" + name + ")", v, e, rel, rel <= need});
      }
      out << renderChecks("recursion " + sig.str() + " symbolic vs numeric", checks, need, fmt);
      return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; }) ? 0 : 1;
    }
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  return run(std::vector<std::string>(argv + 1, argv + argc), out, err);
}

}  // namespace wpcone::cli
