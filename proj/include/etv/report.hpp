#ifndef ETV_REPORT_HPP
#define ETV_REPORT_HPP

#include <algorithm>
#include <cstdint>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "errors.hpp"

namespace etv {

inline constexpr const char* kToolVersion = "0.1.0";

// Outcome of a single check.
//   pass / fail       the residual was measured and compared against the tolerance
//   gated             the hypothesis needed by the identity did not hold at any
//                     sampled point, so the comparison would be vacuous
//   not-applicable    the check does not apply to this structure class at all
//   error             evaluation threw; the message is in `note`
enum class CheckStatus { Pass, Fail, Gated, NotApplicable, Error };

inline const char* status_name(CheckStatus s) {
  switch (s) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Fail: return "fail";
    case CheckStatus::Gated: return "gated";
    case CheckStatus::NotApplicable: return "not-applicable";
    case CheckStatus::Error: return "error";
  }
  return "error";
}

inline CheckStatus status_from_name(const std::string& s) {
  if (s == "pass") return CheckStatus::Pass;
  if (s == "fail") return CheckStatus::Fail;
  if (s == "gated") return CheckStatus::Gated;
  if (s == "not-applicable") return CheckStatus::NotApplicable;
  if (s == "error") return CheckStatus::Error;
  throw InvalidParameters("unknown check status '" + s + "'");
}

struct CheckResult {
  std::string name;
  std::string anchor;  // the formula or property the check measures
  CheckStatus status = CheckStatus::Error;
  int points = 0;                   // sample points that entered the comparison
  double max_residual = 0.0;        // worst normalized residual over those points
  double mean_residual = 0.0;
  double tolerance = 0.0;
  double scale = 0.0;               // largest term magnitude seen (0 if scale-free)
  std::vector<double> worst_point;  // coordinates where max_residual occurred
  std::string gate;                 // why the check was gated, when it was
  std::string note;
  double wall_ms = 0.0;
};

struct RunReport {
  std::string tool = "etv";
  std::string version = kToolVersion;
  std::string scenario;  // file path or corpus entry name
  std::uint64_t seed = 0;
  int points = 0;  // chart sample size requested
  std::vector<CheckResult> checks;
  std::map<std::string, double> tolerances;  // effective per-check tolerances

  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) {
      return c.status != CheckStatus::Fail && c.status != CheckStatus::Error;
    });
  }
  int exit_code() const { return passed() ? 0 : 1; }
};

// JSON serialization.  Key order is fixed and map keys are sorted, so two
// reports from the same scenario and seed serialize byte-identically when
// timing is excluded.
inline nlohmann::ordered_json to_json(const CheckResult& c, bool include_timing = true) {
  nlohmann::ordered_json j;
  j["name"] = c.name;
  j["anchor"] = c.anchor;
  j["status"] = status_name(c.status);
  j["points"] = c.points;
  j["max_residual"] = c.max_residual;
  j["mean_residual"] = c.mean_residual;
  j["tolerance"] = c.tolerance;
  j["scale"] = c.scale;
  j["worst_point"] = c.worst_point;
  if (!c.gate.empty()) j["gate"] = c.gate;
  if (!c.note.empty()) j["note"] = c.note;
  if (include_timing) j["wall_ms"] = c.wall_ms;
  return j;
}

inline nlohmann::ordered_json to_json(const RunReport& r, bool include_timing = true) {
  nlohmann::ordered_json j;
  j["tool"] = r.tool;
  j["version"] = r.version;
  j["scenario"] = r.scenario;
  j["seed"] = r.seed;
  j["points"] = r.points;
  j["status"] = r.passed() ? "pass" : "fail";
  j["checks"] = nlohmann::ordered_json::array();
  for (const CheckResult& c : r.checks) j["checks"].push_back(to_json(c, include_timing));
  j["tolerances"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.tolerances) j["tolerances"][k] = v;
  return j;
}

namespace detail {
inline std::string sci(double v) {
  std::ostringstream os;
  os << std::scientific << std::setprecision(2) << v;
  return os.str();
}
}  // namespace detail

// Human-readable listing: one line per check, a summary line last.
inline void write_text(std::ostream& os, const RunReport& r) {
  os << r.tool << " " << r.version << "  scenario " << r.scenario << "  seed " << r.seed
     << "  points " << r.points << "\n";
  std::size_t w = 5;
  for (const CheckResult& c : r.checks) w = std::max(w, c.name.size());
  int npass = 0, nfail = 0, ngated = 0, nna = 0, nerr = 0;
  for (const CheckResult& c : r.checks) {
    os << "  " << std::left << std::setw(16) << status_name(c.status) << std::setw(static_cast<int>(w) + 2)
       << c.name << std::right;
    switch (c.status) {
      case CheckStatus::Pass:
      case CheckStatus::Fail:
        os << "max " << detail::sci(c.max_residual) << "  tol " << detail::sci(c.tolerance)
           << "  pts " << c.points;
        (c.status == CheckStatus::Pass ? npass : nfail)++;
        break;
      case CheckStatus::Gated:
        os << c.gate;
        ngated++;
        break;
      case CheckStatus::NotApplicable:
        os << c.note;
        nna++;
        break;
      case CheckStatus::Error:
        os << c.note;
        nerr++;
        break;
    }
    if (!c.note.empty() && (c.status == CheckStatus::Pass || c.status == CheckStatus::Fail))
      os << "  (" << c.note << ")";
    os << "\n";
  }
  os << r.checks.size() << " checks: " << npass << " pass";
  if (nfail) os << ", " << nfail << " fail";
  if (ngated) os << ", " << ngated << " gated";
  if (nna) os << ", " << nna << " not-applicable";
  if (nerr) os << ", " << nerr << " error";
  os << "  ->  " << (r.passed() ? "PASS" : "FAIL") << "\n";
}

}  // namespace etv

#endif
