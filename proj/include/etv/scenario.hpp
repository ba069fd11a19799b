#ifndef ETV_SCENARIO_HPP
#define ETV_SCENARIO_HPP

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "constructions.hpp"
#include "levelset.hpp"
#include "report.hpp"

namespace etv {

// ---------------------------------------------------------------------------
// Scenario description
//
// A scenario file is a flat INI-style text: [section] headers, key = value
// lines, '#' comments.  Sections:
//   [chart]       dim, coords, g_<i>_<j> (1-based, upper triangle; missing
//                 off-diagonal entries are zero), domain_<coord> = lo, hi
//   [corpus]      name = <built-in example>  (alternative to [chart])
//   [structure]   alpha, beta, mu, rho, lambda, f, expect_class, level
//   [checks]      names = comma list ("all" expands to every applicable check)
//   [sampling]    count, seed, margin
//   [tolerances]  <check name> = <override>

struct SamplingSpec {
  int count = 64;
  std::uint64_t seed = 2026;
  double margin = 0.05;
};

struct Scenario {
  std::string source = "<inline>";
  std::string corpus_name;  // empty when the chart was given inline
  ChartPtr chart;
  std::shared_ptr<const EinsteinTypeStructure> structure;  // null for chart-only runs
  std::string expect_class;
  bool has_level = false;
  double level = 0.0;
  std::vector<std::string> checks{"all"};
  SamplingSpec sampling;
  std::map<std::string, double> tol_overrides;
};

// ---------------------------------------------------------------------------
// Check registry

// name -> needs a [structure]
inline const std::vector<std::pair<std::string, bool>>& check_groups() {
  static const std::vector<std::pair<std::string, bool>> g = {
      {"identity_suite", false},  {"residual", true},      {"traced_residual", true},
      {"classification", true},   {"d_symmetries", true},  {"d_forms", true},
      {"d_form3", true},          {"fi_d", true},          {"d_norm", true},
      {"y_orthogonality", true},  {"y_soliton_form", true},{"integrability1", true},
      {"integrability2", true},   {"sk_identity", true},   {"sk_first", true},
      {"beta_zero", true},        {"d_norm_identity", true},
      {"d_norm_div_y", true},     {"conformal_einstein", true},
      {"d2_levelset", true},      {"levelset", true},
  };
  return g;
}

inline bool is_check_group(const std::string& name) {
  for (const auto& [n, ns] : check_groups())
    if (n == name) return true;
  return false;
}

inline bool check_needs_structure(const std::string& name) {
  for (const auto& [n, ns] : check_groups())
    if (n == name) return ns;
  throw UnknownCheck("unknown check '" + name + "'");
}

// Default tolerance for every report row a check can emit.  Values reflect how
// each quantity is computed: rows built from symbolic derivatives sit near
// machine precision, rows that differentiate derived fields numerically get
// the looser finite-difference budgets.
inline const std::map<std::string, double>& default_tolerances() {
  static const std::map<std::string, double> t = {
      {"identity/riemann_antisymmetry", 1e-10},
      {"identity/riemann_pair_symmetry", 1e-10},
      {"identity/first_bianchi", 1e-10},
      {"identity/second_bianchi", 1e-8},
      {"identity/hessian_symmetry", 1e-10},
      {"identity/third_derivative_commutation", 1e-8},
      {"identity/traced_commutation", 1e-8},
      {"identity/schur", 1e-5},
      {"identity/ricci_derivative_commutation", 1e-4},
      {"identity/cotton_cyclic", 1e-9},
      {"identity/cotton_traces", 1e-9},
      {"identity/weyl_traces", 1e-9},
      {"identity/kulkarni_nomizu_reconstruction", 1e-9},
      {"identity/schouten_trace", 1e-10},
      {"identity/div_cotton_symmetry", 1e-5},
      {"identity/div_cotton_first_slot", 1e-4},
      {"identity/div_cotton_formula", 5e-4},
      {"identity/cotton_two_definitions", 1e-4},
      {"identity/bach_symmetry_trace", 1e-6},
      {"residual", 1e-8},
      {"traced_residual", 1e-8},
      {"classification", 0.0},
      {"d_symmetries", 1e-10},
      {"d_forms", 1e-9},
      {"d_form3", 1e-9},
      {"fi_d", 1e-8},
      {"d_norm", 1e-8},
      {"y_orthogonality", 1e-8},
      {"y_soliton_form", 1e-6},
      {"integrability1", 1e-6},
      {"integrability2", 1e-4},
      {"sk_identity", 1e-6},
      {"sk_first", 1e-6},
      {"beta_zero_d_vanishes", 1e-6},
      {"beta_zero_cotton", 1e-6},
      {"beta_zero_bach", 1e-4},
      {"beta_zero_c_norm", 1e-4},
      {"d_norm_identity", 1e-4},
      {"d_norm_div_y", 1e-4},
      {"conformal_einstein", 1e-6},
      {"d2_levelset", 1e-6},
      {"d2_rhs_nonnegative", 1e-12},
      {"levelset/grad_norm_constancy", 1e-6},
      {"levelset/mean_curvature_constancy", 1e-6},
      {"levelset/lambda_constancy", 1e-6},
      {"levelset/scalar_curvature_constancy", 1e-6},
      {"levelset/ric_mixed_vanishes", 1e-6},
      {"levelset/umbilicity", 1e-6},
      {"levelset/ricci_block_form", 1e-6},
      {"levelset/induced_einstein", 1e-6},
      {"levelset/cotton_vanishes", 1e-6},
      {"levelset/weyl_vanishes", 1e-6},
  };
  return t;
}

// ---------------------------------------------------------------------------
// Parser

namespace detail {

inline std::string trim_copy(std::string s) {
  auto sp = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && sp(static_cast<unsigned char>(s.front()))) s.erase(s.begin());
  while (!s.empty() && sp(static_cast<unsigned char>(s.back()))) s.pop_back();
  return s;
}

inline std::vector<std::string> split_list(const std::string& v, int line) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim_copy(item);
    if (item.empty()) throw ScenarioError("empty item in comma list", line);
    out.push_back(item);
  }
  if (out.empty()) throw ScenarioError("expected a comma-separated list", line);
  return out;
}

inline double scen_number(const std::string& v, int line) {
  std::size_t pos = 0;
  double d = 0.0;
  try {
    d = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw ScenarioError("expected a number, got '" + v + "'", line);
  }
  if (pos != v.size()) throw ScenarioError("trailing characters after number '" + v + "'", line);
  return d;
}

inline long long scen_int(const std::string& v, int line) {
  std::size_t pos = 0;
  long long n = 0;
  try {
    n = std::stoll(v, &pos);
  } catch (const std::exception&) {
    throw ScenarioError("expected an integer, got '" + v + "'", line);
  }
  if (pos != v.size()) throw ScenarioError("trailing characters after integer '" + v + "'", line);
  return n;
}

inline Expr scen_expr(const std::string& v, std::span<const std::string> coords,
                      const std::string& key, int line) {
  try {
    return parse_expr(v, coords);
  } catch (const SyntaxError& e) {
    throw ScenarioError(key + ": " + e.what(), line);
  }
}

struct RawKV {
  std::string key, value;
  int line;
};

struct RawScenario {
  std::map<std::string, std::vector<RawKV>> sections;
  std::map<std::string, int> section_line;
  bool has(const std::string& s) const { return sections.count(s) != 0; }
};

inline RawScenario collect_raw(std::string_view text) {
  static const std::set<std::string> known = {"chart",  "corpus",   "structure",
                                             "checks", "sampling", "tolerances"};
  RawScenario raw;
  std::string cur;
  std::istringstream in{std::string(text)};
  std::string line;
  int ln = 0;
  while (std::getline(in, line)) {
    ++ln;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = trim_copy(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ScenarioError("unterminated section header", ln);
      std::string name = trim_copy(line.substr(1, line.size() - 2));
      if (!known.count(name)) throw ScenarioError("unknown section [" + name + "]", ln);
      if (raw.has(name)) throw ScenarioError("duplicate section [" + name + "]", ln);
      raw.sections[name];
      raw.section_line[name] = ln;
      cur = name;
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ScenarioError("expected 'key = value'", ln);
    std::string key = trim_copy(line.substr(0, eq));
    std::string value = trim_copy(line.substr(eq + 1));
    if (key.empty()) throw ScenarioError("missing key before '='", ln);
    if (value.empty()) throw ScenarioError("missing value for '" + key + "'", ln);
    if (cur.empty()) throw ScenarioError("'" + key + "' appears before any [section]", ln);
    raw.sections[cur].push_back({key, value, ln});
  }
  return raw;
}

inline ChartPtr build_scenario_chart(const std::vector<RawKV>& sec, const std::string& name) {
  int dim = 0;
  std::vector<std::string> coords;
  std::map<std::pair<int, int>, RawKV> metric;
  std::map<std::string, RawKV> domains;
  for (const RawKV& kv : sec) {
    if (kv.key == "dim") {
      long long d = scen_int(kv.value, kv.line);
      if (d < 3 || d > 9) throw ScenarioError("dim must be between 3 and 9", kv.line);
      dim = static_cast<int>(d);
    } else if (kv.key == "coords") {
      coords = split_list(kv.value, kv.line);
    } else if (kv.key.rfind("g_", 0) == 0) {
      std::string rest = kv.key.substr(2);
      auto us = rest.find('_');
      if (us == std::string::npos)
        throw ScenarioError("metric keys look like g_<i>_<j>", kv.line);
      int i = static_cast<int>(scen_int(rest.substr(0, us), kv.line));
      int j = static_cast<int>(scen_int(rest.substr(us + 1), kv.line));
      if (i < 1 || j < 1) throw ScenarioError("metric indices are 1-based", kv.line);
      if (i > j)
        throw ScenarioError("give the upper triangle: use g_" + std::to_string(j) + "_" +
                                std::to_string(i),
                            kv.line);
      if (!metric.emplace(std::make_pair(i, j), kv).second)
        throw ScenarioError("duplicate key '" + kv.key + "'", kv.line);
    } else if (kv.key.rfind("domain_", 0) == 0) {
      std::string c = kv.key.substr(7);
      if (!domains.emplace(c, kv).second)
        throw ScenarioError("duplicate key '" + kv.key + "'", kv.line);
    } else {
      throw ScenarioError("unknown key '" + kv.key + "' in [chart]", kv.line);
    }
  }
  if (dim == 0) throw ScenarioError("[chart] needs dim", 0);
  if (coords.empty()) throw ScenarioError("[chart] needs coords", 0);
  if (static_cast<int>(coords.size()) != dim)
    throw ScenarioError("coords lists " + std::to_string(coords.size()) + " names but dim = " +
                            std::to_string(dim),
                        0);
  if (std::set<std::string>(coords.begin(), coords.end()).size() != coords.size())
    throw ScenarioError("coordinate names must be distinct", 0);

  for (const auto& [key, kv] : metric)
    if (key.first > dim || key.second > dim)
      throw ScenarioError("metric index out of range in '" + kv.key + "'", kv.line);

  std::vector<Expr> upper;
  for (int i = 1; i <= dim; ++i)
    for (int j = i; j <= dim; ++j) {
      auto it = metric.find({i, j});
      if (it == metric.end()) {
        if (i == j)
          throw ScenarioError(
              "missing diagonal entry g_" + std::to_string(i) + "_" + std::to_string(i), 0);
        upper.push_back(Expr::number(0.0));
        continue;
      }
      upper.push_back(scen_expr(it->second.value, coords, it->second.key, it->second.line));
    }

  std::vector<Interval> domain;
  for (const std::string& c : coords) {
    auto it = domains.find(c);
    if (it == domains.end()) throw ScenarioError("missing domain_" + c, 0);
    auto parts = split_list(it->second.value, it->second.line);
    if (parts.size() != 2)
      throw ScenarioError("domain_" + c + " wants 'lo, hi'", it->second.line);
    double lo = scen_number(parts[0], it->second.line);
    double hi = scen_number(parts[1], it->second.line);
    if (!(lo < hi)) throw ScenarioError("domain_" + c + " needs lo < hi", it->second.line);
    domain.push_back({lo, hi});
  }
  for (const auto& [c, kv] : domains)
    if (std::find(coords.begin(), coords.end(), c) == coords.end())
      throw ScenarioError("domain_" + c + " names no coordinate", kv.line);

  return std::make_shared<Chart>(name, coords, upper, domain);
}

inline std::string source_stem(const std::string& source) {
  std::string s = source;
  if (auto p = s.find_last_of("/\\"); p != std::string::npos) s = s.substr(p + 1);
  if (auto d = s.rfind('.'); d != std::string::npos && d > 0) s = s.substr(0, d);
  if (s.empty() || s == "<inline>") s = "scenario";
  return s;
}

}  // namespace detail

inline Scenario parse_scenario(std::string_view text, std::string source = "<inline>") {
  detail::RawScenario raw = detail::collect_raw(text);
  Scenario sc;
  sc.source = std::move(source);

  const bool has_chart = raw.has("chart");
  const bool has_corpus = raw.has("corpus");
  if (has_chart && has_corpus)
    throw ScenarioError("give [chart] or [corpus], not both", raw.section_line.at("corpus"));
  if (!has_chart && !has_corpus)
    throw ScenarioError("a scenario needs a [chart] or [corpus] section", 0);

  static const std::set<std::string> class_names = {"trivial-check", "degenerate",
                                                    "nondegenerate", "beta_zero", "alpha_zero"};

  std::shared_ptr<const EinsteinTypeStructure> corpus_structure;
  if (has_corpus) {
    const auto& sec = raw.sections.at("corpus");
    for (const detail::RawKV& kv : sec) {
      if (kv.key == "name") {
        sc.corpus_name = kv.value;
      } else if (kv.key == "expect_class") {
        if (!class_names.count(kv.value))
          throw ScenarioError("unknown class '" + kv.value + "'", kv.line);
        sc.expect_class = kv.value;
      } else if (kv.key == "level") {
        sc.level = detail::scen_number(kv.value, kv.line);
        sc.has_level = true;
      } else {
        throw ScenarioError("unknown key '" + kv.key + "' in [corpus]", kv.line);
      }
    }
    if (sc.corpus_name.empty())
      throw ScenarioError("[corpus] needs name", raw.section_line.at("corpus"));
    try {
      const CorpusEntry& e = corpus_entry(sc.corpus_name);
      sc.chart = e.chart;
      corpus_structure = e.structure;
    } catch (const UnknownCorpusEntry& e) {
      throw ScenarioError(e.what(), raw.section_line.at("corpus"));
    }
  } else {
    sc.chart = detail::build_scenario_chart(raw.sections.at("chart"),
                                            detail::source_stem(sc.source));
  }

  if (raw.has("structure")) {
    if (corpus_structure)
      throw ScenarioError("corpus entry '" + sc.corpus_name + "' already carries a structure",
                          raw.section_line.at("structure"));
    double alpha = 0, beta = 0, mu = 0, rho = 0;
    Expr lambda = Expr::number(0.0), f = Expr::number(0.0);
    const auto coords = std::span<const std::string>(sc.chart->coords());
    for (const detail::RawKV& kv : raw.sections.at("structure")) {
      if (kv.key == "alpha") alpha = detail::scen_number(kv.value, kv.line);
      else if (kv.key == "beta") beta = detail::scen_number(kv.value, kv.line);
      else if (kv.key == "mu") mu = detail::scen_number(kv.value, kv.line);
      else if (kv.key == "rho") rho = detail::scen_number(kv.value, kv.line);
      else if (kv.key == "lambda") lambda = detail::scen_expr(kv.value, coords, "lambda", kv.line);
      else if (kv.key == "f") f = detail::scen_expr(kv.value, coords, "f", kv.line);
      else if (kv.key == "expect_class") {
        if (!class_names.count(kv.value))
          throw ScenarioError("unknown class '" + kv.value + "'", kv.line);
        sc.expect_class = kv.value;
      } else if (kv.key == "level") {
        sc.level = detail::scen_number(kv.value, kv.line);
        sc.has_level = true;
      } else {
        throw ScenarioError("unknown key '" + kv.key + "' in [structure]", kv.line);
      }
    }
    try {
      sc.structure = std::make_shared<EinsteinTypeStructure>(sc.chart, alpha, beta, mu, rho,
                                                             std::move(lambda), std::move(f));
    } catch (const Error& e) {
      throw ScenarioError(e.what(), raw.section_line.at("structure"));
    }
  } else {
    sc.structure = corpus_structure;
  }

  if (raw.has("checks")) {
    sc.checks.clear();
    for (const detail::RawKV& kv : raw.sections.at("checks")) {
      if (kv.key != "names")
        throw ScenarioError("unknown key '" + kv.key + "' in [checks]", kv.line);
      for (std::string& n : detail::split_list(kv.value, kv.line)) {
        if (n != "all" && !is_check_group(n))
          throw ScenarioError("unknown check '" + n + "'", kv.line);
        if (n != "all" && check_needs_structure(n) && !sc.structure)
          throw ScenarioError("check '" + n + "' needs a [structure]", kv.line);
        sc.checks.push_back(std::move(n));
      }
    }
    if (sc.checks.empty())
      throw ScenarioError("[checks] lists no names", raw.section_line.at("checks"));
  }

  if (raw.has("sampling")) {
    for (const detail::RawKV& kv : raw.sections.at("sampling")) {
      if (kv.key == "count") {
        long long c = detail::scen_int(kv.value, kv.line);
        if (c < 1 || c > 100000) throw ScenarioError("count must be in [1, 100000]", kv.line);
        sc.sampling.count = static_cast<int>(c);
      } else if (kv.key == "seed") {
        long long s = detail::scen_int(kv.value, kv.line);
        if (s < 0) throw ScenarioError("seed must be nonnegative", kv.line);
        sc.sampling.seed = static_cast<std::uint64_t>(s);
      } else if (kv.key == "margin") {
        double mg = detail::scen_number(kv.value, kv.line);
        if (mg < 0.0 || mg >= 0.45) throw ScenarioError("margin must be in [0, 0.45)", kv.line);
        sc.sampling.margin = mg;
      } else {
        throw ScenarioError("unknown key '" + kv.key + "' in [sampling]", kv.line);
      }
    }
  }

  if (raw.has("tolerances")) {
    for (const detail::RawKV& kv : raw.sections.at("tolerances")) {
      if (!default_tolerances().count(kv.key))
        throw ScenarioError("unknown check name '" + kv.key + "' in [tolerances]", kv.line);
      double v = detail::scen_number(kv.value, kv.line);
      if (!(v > 0.0)) throw ScenarioError("tolerance for '" + kv.key + "' must be positive",
                                          kv.line);
      sc.tol_overrides[kv.key] = v;
    }
  }

  return sc;
}

inline Scenario parse_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path);
}

// ---------------------------------------------------------------------------
// Runner

struct RunOptions {
  int points = 0;  // 0 keeps the scenario's sampling count
  bool has_seed = false;
  std::uint64_t seed = 0;
  double tol_scale = 1.0;
  std::vector<std::string> checks;  // nonempty overrides the scenario's list
};

namespace detail {

struct RowAcc {
  std::string name, anchor;
  double mx = -1.0, sum = 0.0, scale = 0.0;
  int n = 0;
  Point worst;
  int gated_pts = 0;
  double worst_gate = 0.0;

  RowAcc() = default;
  RowAcc(std::string nm, std::string an) : name(std::move(nm)), anchor(std::move(an)) {}
  void add(double v, double sc, const Point& p) {
    if (v > mx) {
      mx = v;
      worst = p;
    }
    sum += v;
    ++n;
    scale = std::max(scale, sc);
  }
  void gate(double gr) {
    ++gated_pts;
    worst_gate = std::max(worst_gate, gr);
  }
};

class ScenarioRunner {
 public:
  ScenarioRunner(const Scenario& sc, RunReport& rep, double tol_scale, int count,
                 std::uint64_t seed)
      : sc_(sc), s_(sc.structure.get()), bc_(*sc.chart), rep_(rep), tol_scale_(tol_scale),
        seed_(seed) {
    pts_ = sc.chart->sample(count, seed, sc.sampling.margin);
  }

  double tol(const std::string& name) const {
    double base = 1e-6;
    if (auto it = sc_.tol_overrides.find(name); it != sc_.tol_overrides.end())
      base = it->second;
    else if (auto dt = default_tolerances().find(name); dt != default_tolerances().end())
      base = dt->second;
    return base * tol_scale_;
  }

  void run_group(const std::string& name) {
    auto t0 = std::chrono::steady_clock::now();
    std::vector<CheckResult> rows;
    try {
      rows = dispatch(name);
    } catch (const WrongClass& e) {
      rows.push_back(simple_row(name, CheckStatus::NotApplicable, e.what()));
    } catch (const Error& e) {
      rows.push_back(simple_row(name, CheckStatus::Error, e.what()));
    } catch (const std::exception& e) {
      rows.push_back(simple_row(name, CheckStatus::Error, e.what()));
    }
    double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                    .count();
    for (CheckResult& r : rows) {
      r.wall_ms = ms;  // time of the producing evaluation group
      rep_.tolerances.emplace(r.name, r.tolerance);
      rep_.checks.push_back(std::move(r));
    }
  }

 private:
  const Scenario& sc_;
  const EinsteinTypeStructure* s_;
  BundleCache bc_;
  RunReport& rep_;
  double tol_scale_;
  std::uint64_t seed_;
  std::vector<Point> pts_;

  const EinsteinTypeStructure& str() const { return *s_; }

  CheckResult simple_row(const std::string& name, CheckStatus st, std::string note) const {
    CheckResult c;
    c.name = name;
    c.status = st;
    c.tolerance = tol(name);
    c.note = std::move(note);
    return c;
  }

  CheckResult finish(const RowAcc& a) const {
    CheckResult c;
    c.name = a.name;
    c.anchor = a.anchor;
    c.tolerance = tol(a.name);
    if (a.n == 0 && a.gated_pts == 0) {
      c.status = CheckStatus::Error;
      c.note = "no usable sample points";
    } else if (a.n == 0) {
      c.status = CheckStatus::Gated;
      c.points = 0;
      c.gate = "defining equation residual " + sci(a.worst_gate) + " above the gate at all " +
               std::to_string(a.gated_pts) + " sampled points";
    } else {
      c.points = a.n;
      c.max_residual = a.mx;
      c.mean_residual = a.sum / a.n;
      c.scale = a.scale;
      c.worst_point = a.worst;
      c.status = a.mx <= c.tolerance ? CheckStatus::Pass : CheckStatus::Fail;
      if (a.gated_pts > 0)
        c.note = std::to_string(a.gated_pts) + " further point(s) gated";
    }
    return c;
  }

  std::vector<CheckResult> dispatch(const std::string& name) {
    if (name == "identity_suite") return g_identity_suite();
    if (name == "residual") return g_residual();
    if (name == "traced_residual") return g_traced_residual();
    if (name == "classification") return g_classification();
    if (name == "d_symmetries") return g_d_symmetries();
    if (name == "d_forms") return g_d_forms();
    if (name == "d_form3") return g_d_form3();
    if (name == "fi_d") return g_named_pointwise("fi_d", [this](const CurvatureBundle& B) {
      return fi_d_contraction_residual_at(str(), B);
    });
    if (name == "d_norm") return g_named_pointwise("d_norm", [this](const CurvatureBundle& B) {
      return d_norm_contraction_residual_at(str(), B);
    });
    if (name == "y_orthogonality") return g_y_orthogonality();
    if (name == "y_soliton_form") return g_y_soliton_form();
    if (name == "integrability1") return g_integrability1();
    if (name == "integrability2") return g_integrability2();
    if (name == "sk_identity") return g_sk(false);
    if (name == "sk_first") return g_sk(true);
    if (name == "beta_zero") return g_beta_zero();
    if (name == "d_norm_identity") return g_d_norm_gated(false);
    if (name == "d_norm_div_y") return g_d_norm_gated(true);
    if (name == "conformal_einstein") return g_conformal_einstein();
    if (name == "d2_levelset") return g_d2_levelset();
    if (name == "levelset") return g_levelset();
    throw UnknownCheck("unknown check '" + name + "'");
  }

  // Deterministic smooth probe used by the chart-only identity suite.
  Expr probe_f() const {
    const auto& coords = sc_.chart->coords();
    std::string src;
    for (std::size_t i = 0; i < coords.size(); ++i) {
      if (i) src += " + ";
      src += std::to_string(0.5 + 0.1 * static_cast<double>(i)) + "*sin(" + coords[i] + " + " +
             std::to_string(0.3 * static_cast<double>(i + 1)) + ")";
    }
    return parse_expr(src, std::span<const std::string>(coords));
  }

  std::vector<CheckResult> g_identity_suite() {
    Expr fe = s_ ? s_->f_expr() : probe_f();
    ScalarCache fc(fe, sc_.chart->dim());
    std::map<std::string, RowAcc> accs;
    for (const Point& p : pts_) {
      for (const NamedResidual& nr : identity_suite_at(bc_, p, &fc, true)) {
        RowAcc& a = accs["identity/" + nr.name];
        if (a.name.empty()) {
          a.name = "identity/" + nr.name;
          a.anchor = nr.anchor;
        }
        a.add(nr.normalized(), nr.scale, p);
      }
    }
    std::vector<CheckResult> out;
    for (const auto& [k, a] : accs) out.push_back(finish(a));
    return out;
  }

  std::vector<CheckResult> g_residual() {
    RowAcc a("residual", "alpha Ric + beta Hess f + mu df (x) df = (rho S + lambda) g");
    for (const Point& p : pts_) a.add(structure_residual_normalized(str(), bc_.at(p)), 0.0, p);
    return {finish(a)};
  }

  std::vector<CheckResult> g_traced_residual() {
    RowAcc a("traced_residual", "(alpha - m rho) S + beta Lap f + mu |grad f|^2 = m lambda");
    for (const Point& p : pts_) {
      const CurvatureBundle& B = bc_.at(p);
      HessData H = hess_data(B, str().f_cache());
      const int m = B.m;
      double lam = str().lambda_cache().value(p);
      double t1 = (str().alpha() - m * str().rho()) * B.S;
      double t2 = str().beta() * H.lap;
      double t3 = str().mu() * H.grad2;
      double t4 = m * lam;
      double scale = std::max({std::abs(t1), std::abs(t2), std::abs(t3), std::abs(t4)});
      a.add(std::abs(t1 + t2 + t3 - t4) / std::max(1.0, scale), scale, p);
    }
    return {finish(a)};
  }

  std::vector<CheckResult> g_classification() {
    CheckResult c;
    c.name = "classification";
    c.anchor = "parameter class from (alpha, beta, mu) and beta^2 = (m-2) alpha mu";
    c.tolerance = tol(c.name);
    const char* cn = class_name(str().classify());
    c.note = cn;
    c.status = CheckStatus::Pass;
    if (!sc_.expect_class.empty() && sc_.expect_class != cn) {
      c.status = CheckStatus::Fail;
      c.note = "classified as " + std::string(cn) + ", expected " + sc_.expect_class;
    }
    return {c};
  }

  std::vector<CheckResult> g_d_symmetries() {
    RowAcc a("d_symmetries", "D_ijk = -D_ikj and every metric trace of D vanishes");
    for (const Point& p : pts_) {
      const CurvatureBundle& B = bc_.at(p);
      const int m = B.m;
      DTensor D = d_tensor_at(str(), B, 1);
      double raw = 0.0, sc = 0.0;
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
          for (int k = 0; k < m; ++k) {
            sc = std::max(sc, std::abs(D.t(i, j, k)));
            raw = std::max(raw, std::abs(D.t(i, j, k) + D.t(i, k, j)));
          }
      for (int k = 0; k < m; ++k) {
        double t12 = 0.0, t13 = 0.0;
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < m; ++j) {
            t12 += B.gu(i, j) * D.t(i, j, k);
            t13 += B.gu(i, j) * D.t(i, k, j);
          }
        raw = std::max({raw, std::abs(t12), std::abs(t13)});
      }
      a.add(raw / std::max(1.0, sc), sc, p);
    }
    return {finish(a)};
  }

  std::vector<CheckResult> g_d_forms() {
    RowAcc a("d_forms", "the Cotton route and the Schouten route to D agree");
    for (const Point& p : pts_) {
      const CurvatureBundle& B = bc_.at(p);
      DTensor D1 = d_tensor_at(str(), B, 1);
      DTensor D2 = d_tensor_at(str(), B, 2);
      double raw = 0.0, sc = 0.0;
      const int m = B.m;
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
          for (int k = 0; k < m; ++k) {
            sc = std::max({sc, std::abs(D1.t(i, j, k)), std::abs(D2.t(i, j, k))});
            raw = std::max(raw, std::abs(D1.t(i, j, k) - D2.t(i, j, k)));
          }
      a.add(raw / std::max(1.0, sc), sc, p);
    }
    return {finish(a)};
  }

  std::vector<CheckResult> g_d_form3() {
    if (str().alpha() == 0.0)
      throw AlphaZero("the Hessian route to D needs alpha != 0");
    RowAcc a("d_form3", "on solutions the Hessian route to D agrees with the Cotton route");
    for (const Point& p : pts_) {
      const CurvatureBundle& B = bc_.at(p);
      double gr = structure_residual_normalized(str(), B);
      if (gr > kDefaultGate) {
        a.gate(gr);
        continue;
      }
      DTensor D1 = d_tensor_at(str(), B, 1);
      DTensor D3 = d_tensor_at(str(), B, 3);
      double raw = 0.0, sc = 0.0;
      const int m = B.m;
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
          for (int k = 0; k < m; ++k) {
            sc = std::max({sc, std::abs(D1.t(i, j, k)), std::abs(D3.t(i, j, k))});
            raw = std::max(raw, std::abs(D1.t(i, j, k) - D3.t(i, j, k)));
          }
      a.add(raw / std::max(1.0, sc), sc, p);
    }
    return {finish(a)};
  }

  template <class Fn>
  std::vector<CheckResult> g_named_pointwise(const std::string& row, Fn&& fn) {
    RowAcc a(row, "");
    for (const Point& p : pts_) {
      NamedResidual nr = fn(bc_.at(p));
      if (a.anchor.empty()) a.anchor = nr.anchor;
      a.add(nr.normalized(), nr.scale, p);
    }
    return {finish(a)};
  }

  std::vector<CheckResult> g_y_orthogonality() {
    RowAcc a("y_orthogonality", "g(Y, grad f) = 0");
    for (const Point& p : pts_) a.add(y_orthogonality_residual_at(str(), bc_.at(p)), 0.0, p);
    return {finish(a)};
  }

  std::vector<CheckResult> g_y_soliton_form() {
    if (!(str().alpha() == 1.0 && str().beta() == 1.0 && str().mu() == 0.0 &&
          str().rho() == 0.0))
      throw WrongClass("the soliton form of Y needs alpha = beta = 1, mu = rho = 0");
    return g_named_pointwise("y_soliton_form", [this](const CurvatureBundle& B) {
      return ricci_soliton_y_alternative_residual_at(str(), B);
    });
  }

  template <class Fn>
  std::vector<CheckResult> g_gated_identity(const std::string& row, const std::string& anchor,
                                            Fn&& fn) {
    RowAcc a(row, anchor);
    for (const Point& p : pts_) {
      Gated<IdentityValue> r = fn(p);
      if (!r.applicable) {
        a.gate(r.gate_residual);
        continue;
      }
      a.add(r.value.normalized(), r.value.scale, p);
    }
    return {finish(a)};
  }

  std::vector<CheckResult> g_integrability1() {
    return g_gated_identity(
        "integrability1",
        "alpha C_ijk + beta f_t W_tijk = [beta - (m-2) alpha mu / beta] D_ijk",
        [this](const Point& p) { return integrability1_residual_at(str(), bc_.at(p)); });
  }

  std::vector<CheckResult> g_integrability2() {
    return g_gated_identity(
        "integrability2",
        "alpha B_ij = 1/(m-2) { [beta - (m-2) alpha mu / beta] D_ijk,k + beta (m-3)/(m-2) f_t "
        "C_jit - mu f_t f_k W_itjk }",
        [this](const Point& p) { return integrability2_residual_at(str(), bc_, p); });
  }

  std::vector<CheckResult> g_sk(bool first_form) {
    if (first_form)
      return g_gated_identity(
          "sk_first",
          "[alpha - 2 rho (m-1)] S_k = 2 beta f_t R_tk + 2 (m-1) lambda_k - 2 mu (f_t f_tk - "
          "Lap f f_k)",
          [this](const Point& p) { return sk_first_identity_residual_at(str(), bc_.at(p)); });
    return g_gated_identity(
        "sk_identity",
        "[alpha - 2 rho (m-1)] S_k = 2 (beta + alpha mu / beta) f_t R_tk + 2 (m-1) lambda_k - "
        "(2 mu / beta)[alpha - rho (m-1)] S f_k + (2 mu / beta)(m-1) lambda f_k",
        [this](const Point& p) { return sk_identity_residual_at(str(), bc_.at(p)); });
  }

  std::vector<CheckResult> g_beta_zero() {
    std::map<std::string, RowAcc> accs;
    int gated = 0;
    double worst_gate = 0.0;
    for (const Point& p : pts_) {
      Gated<std::vector<NamedResidual>> r = beta_zero_identities_at(str(), bc_, p);
      if (!r.applicable) {
        ++gated;
        worst_gate = std::max(worst_gate, r.gate_residual);
        continue;
      }
      for (const NamedResidual& nr : r.value) {
        RowAcc& a = accs[nr.name];
        if (a.name.empty()) {
          a.name = nr.name;
          a.anchor = nr.anchor;
        }
        a.add(nr.normalized(), nr.scale, p);
      }
    }
    if (accs.empty()) {
      RowAcc a("beta_zero", "identities of the beta = 0 class");
      a.gated_pts = gated;
      a.worst_gate = worst_gate;
      return {finish(a)};
    }
    std::vector<CheckResult> out;
    for (auto& [k, a] : accs) {
      a.gated_pts = gated;
      a.worst_gate = worst_gate;
      out.push_back(finish(a));
    }
    return out;
  }

  std::vector<CheckResult> g_d_norm_gated(bool div_y) {
    const std::string row = div_y ? "d_norm_div_y" : "d_norm_identity";
    RowAcc a(row, "");
    for (const Point& p : pts_) {
      Gated<NamedResidual> r = div_y ? d_norm_div_y_residual_at(str(), bc_, p)
                                     : d_norm_identity_residual_at(str(), bc_, p);
      if (a.anchor.empty()) a.anchor = r.value.anchor;
      if (!r.applicable) {
        a.gate(r.gate_residual);
        continue;
      }
      a.add(r.value.normalized(), r.value.scale, p);
    }
    return {finish(a)};
  }

  std::vector<CheckResult> g_conformal_einstein() {
    if (str().classify() != StructureClass::Degenerate)
      throw WrongClass("the conformal Einstein check needs a degenerate structure");
    RowAcc a("conformal_einstein",
             "Ric(ghat) = (S(ghat)/m) ghat for ghat = e^{2af} g, a = -beta/((m-2) alpha)");
    for (const Point& p : pts_) {
      PointTensor r = conformal_einstein_residual_at(str(), p);
      a.add(r.max_abs(), 0.0, p);
    }
    return {finish(a)};
  }

  std::vector<CheckResult> g_d2_levelset() {
    RowAcc a("d2_levelset",
             "|D|^2 = (beta/alpha)^2 2 |grad f|^4/(m-2)^2 |h - H delta|^2 + 2 |grad f|^2 / "
             "((m-1)(m-2)) Ric(e_a, n)^2");
    RowAcc b("d2_rhs_nonnegative", "both terms of the |D|^2 split are sums of squares");
    int skipped = 0;
    for (const Point& p : pts_) {
      try {
        Gated<D2LevelsetSplit> r = d2_levelset_identity_residual_at(str(), bc_.at(p));
        if (!r.applicable) {
          a.gate(r.gate_residual);
          b.gate(r.gate_residual);
          continue;
        }
        a.add(r.value.normalized(), r.value.scale(), p);
        b.add(std::max(0.0, std::max(-r.value.shear, -r.value.mixed)), r.value.scale(), p);
      } catch (const CriticalPoint&) {
        ++skipped;
      }
    }
    CheckResult ca = finish(a), cb = finish(b);
    if (skipped > 0) {
      std::string note = std::to_string(skipped) + " near-critical point(s) skipped";
      ca.note = ca.note.empty() ? note : ca.note + "; " + note;
      cb.note = cb.note.empty() ? note : cb.note + "; " + note;
    }
    return {ca, cb};
  }

  std::vector<CheckResult> g_levelset() {
    const double c0 = sc_.has_level ? sc_.level : str().f_cache().value(pts_.front());
    std::vector<Point> lvl =
        sample_level(str(), c0, sc_.sampling.count, static_cast<unsigned>(seed_));
    if (lvl.empty()) {
      std::ostringstream os;
      os << "no sample points found on the level f = " << c0;
      return {simple_row("levelset", CheckStatus::Error, os.str())};
    }
    LevelSetReport lr = levelset_property_report(str(), lvl);
    std::string gate_note;
    if (!lr.gate_passed) {
      gate_note = "level-sample gates exceeded: max |D| = " + sci(lr.d_gate) +
                  ", defining equation residual " + sci(lr.structure_gate);
    }
    std::vector<CheckResult> out;
    for (const NamedResidual& nr : lr.properties) {
      CheckResult c;
      c.name = "levelset/" + nr.name;
      c.anchor = nr.anchor;
      c.points = lr.points;
      c.max_residual = nr.normalized();
      c.mean_residual = nr.normalized();
      c.scale = nr.scale;
      c.tolerance = tol(c.name);
      if (lr.gate_passed)
        c.status = c.max_residual <= c.tolerance ? CheckStatus::Pass : CheckStatus::Fail;
      else {
        c.status = CheckStatus::Gated;
        c.gate = gate_note;
      }
      out.push_back(std::move(c));
    }
    return out;
  }
};

}  // namespace detail

inline std::vector<std::string> resolve_checks(const std::vector<std::string>& requested,
                                               bool has_structure) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  auto push = [&](const std::string& n) {
    if (seen.insert(n).second) out.push_back(n);
  };
  for (const std::string& r : requested) {
    if (r == "all") {
      for (const auto& [name, needs] : check_groups())
        if (!needs || has_structure) push(name);
      continue;
    }
    if (!is_check_group(r)) throw UnknownCheck("unknown check '" + r + "'");
    if (check_needs_structure(r) && !has_structure)
      throw ScenarioError("check '" + r + "' needs a structure");
    push(r);
  }
  return out;
}

inline RunReport run_scenario(const Scenario& sc, const RunOptions& opt = {}) {
  RunReport rep;
  rep.scenario = sc.corpus_name.empty() ? sc.source : sc.corpus_name;
  const int count = opt.points > 0 ? opt.points : sc.sampling.count;
  const std::uint64_t seed = opt.has_seed ? opt.seed : sc.sampling.seed;
  rep.seed = seed;
  rep.points = count;

  const std::vector<std::string> groups =
      resolve_checks(opt.checks.empty() ? sc.checks : opt.checks,
                     sc.structure != nullptr);

  detail::ScenarioRunner runner(sc, rep, opt.tol_scale, count, seed);
  for (const std::string& g : groups) runner.run_group(g);

  std::sort(rep.checks.begin(), rep.checks.end(),
            [](const CheckResult& x, const CheckResult& y) { return x.name < y.name; });
  return rep;
}

}  // namespace etv

#endif
