// Command-line front end: scenario runs, the radial spectral utilities, and
// the built-in example listing.
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "etv/scenario.hpp"
#include "etv/spectral.hpp"

namespace {

int do_run(const std::string& path, const std::string& json_out, int points, bool seed_set,
           std::uint64_t seed, double tol_scale, const std::string& checks_csv,
           bool omit_timing) {
  etv::Scenario sc = etv::parse_scenario_file(path);
  etv::RunOptions opt;
  opt.points = points;
  opt.has_seed = seed_set;
  opt.seed = seed;
  opt.tol_scale = tol_scale;
  if (!checks_csv.empty()) opt.checks = etv::detail::split_list(checks_csv, 0);

  etv::RunReport rep = etv::run_scenario(sc, opt);
  etv::write_text(std::cout, rep);

  if (!json_out.empty()) {
    std::string dumped = etv::to_json(rep, !omit_timing).dump(2) + "\n";
    if (json_out == "-") {
      std::cout << dumped;
    } else {
      std::ofstream out(json_out);
      if (!out) {
        std::cerr << "error: cannot write '" << json_out << "'\n";
        return 2;
      }
      out << dumped;
    }
  }
  return rep.exit_code();
}

int do_chi(const std::string& vhat_src, const std::vector<double>& at, double r_inf,
           double tail) {
  etv::Expr vhat = etv::parse_expr(vhat_src, {"r"});
  std::cout << std::setprecision(12);
  for (double r : at) {
    double c = etv::critical_curve(vhat, r, {r_inf, tail});
    std::cout << "r = " << r << "   chi = " << c << "\n";
  }
  return 0;
}

int do_lambda1(const std::string& v_src, const std::string& q_src, int m, double radius,
               int grid) {
  etv::RadialModel model;
  model.m = m;
  model.v = etv::radial_fn(etv::parse_expr(v_src, {"r"}));
  model.q = etv::radial_fn(etv::parse_expr(q_src, {"r"}));
  double l1 = etv::lambda1_radial(model, radius, grid);
  std::cout << std::setprecision(12) << "lambda1 = " << l1 << "   (radius " << radius
            << ", grid " << grid << ")\n";
  return 0;
}

int do_balance(const std::string& q_src, const std::string& vhat_src, double from, double to,
               double r_inf, double tail) {
  etv::Expr q = etv::parse_expr(q_src, {"r"});
  etv::Expr vhat = etv::parse_expr(vhat_src, {"r"});
  etv::Condition254Report rep =
      etv::condition_254_report(etv::radial_fn(q), etv::radial_fn(vhat), from, to, {r_inf, tail});
  std::cout << std::setprecision(6) << std::scientific;
  std::cout << "  r                I(r)\n";
  const std::size_t n = rep.r.size();
  const std::size_t step = n > 9 ? (n - 1) / 8 : 1;
  for (std::size_t i = 0; i < n; i += step) std::cout << "  " << rep.r[i] << "   " << rep.integral[i] << "\n";
  if ((n - 1) % step != 0) std::cout << "  " << rep.r.back() << "   " << rep.integral.back() << "\n";
  std::cout << "slope over the last decade: " << rep.slope_last_decade << "\n"
            << "verdict: " << rep.verdict << "  (" << rep.note << ")\n";
  return 0;
}

int do_list() {
  std::size_t wname = 4, wclass = 5;
  for (const etv::CorpusEntry& e : etv::corpus()) {
    wname = std::max(wname, e.name.size());
    std::string cls = e.structure ? etv::class_name(e.structure->classify()) : "chart only";
    wclass = std::max(wclass, cls.size());
  }
  std::cout << std::left << std::setw(static_cast<int>(wname) + 2) << "name"
            << std::setw(5) << "dim" << std::setw(static_cast<int>(wclass) + 2) << "class"
            << "summary\n";
  for (const etv::CorpusEntry& e : etv::corpus()) {
    std::string cls = e.structure ? etv::class_name(e.structure->classify()) : "chart only";
    std::cout << std::setw(static_cast<int>(wname) + 2) << e.name << std::setw(5)
              << e.chart->dim() << std::setw(static_cast<int>(wclass) + 2) << cls << e.summary
              << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"curvature and identity checks for gradient Einstein-type structures"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "evaluate a scenario file and report every check");
  std::string scn_path, json_out, checks_csv;
  int points = 0;
  std::uint64_t seed = 0;
  double tol_scale = 1.0;
  bool omit_timing = false;
  run->add_option("file", scn_path, "scenario file")->required();
  run->add_option("--json", json_out, "write the JSON report to this path ('-' for stdout)");
  run->add_option("--points", points, "override the sample count");
  run->add_option("--seed", seed, "override the sampling seed");
  run->add_option("--tol-scale", tol_scale, "multiply every tolerance by this factor");
  run->add_option("--checks", checks_csv, "comma list of checks to run (default: scenario's)");
  run->add_flag("--omit-timing", omit_timing, "drop wall_ms from the JSON report");

  auto* spectral = app.add_subcommand("spectral", "radial spectral utilities");
  spectral->require_subcommand(1);

  auto* chi = spectral->add_subcommand("chi", "critical curve of a radial weight");
  std::string vhat_src;
  std::vector<double> at;
  double r_inf = 0.0, tail = 0.0;
  chi->add_option("--vhat", vhat_src, "weight as an expression in r")->required();
  chi->add_option("--at", at, "radii to evaluate")->required()->delimiter(',');
  chi->add_option("--r-inf", r_inf, "truncation radius for the tail integral")->required();
  chi->add_option("--tail", tail, "analytic value of the integral beyond --r-inf (default 0)");

  auto* lam = spectral->add_subcommand(
      "lambda1", "smallest Dirichlet eigenvalue of -(1/v)(v u')' + q on (0, R)");
  std::string v_src, q_src = "0";
  int m = 3, grid = 1000;
  double radius = 1.0;
  lam->add_option("--v", v_src, "weight v(r), e.g. the boundary-area function")->required();
  lam->add_option("--q", q_src, "zeroth-order coefficient q(r) (default 0)");
  lam->add_option("--m", m, "ambient dimension (bookkeeping only)");
  lam->add_option("--radius", radius, "ball radius R")->required();
  lam->add_option("--grid", grid, "number of grid cells (default 1000)");

  auto* bal = spectral->add_subcommand(
      "balance", "finite-horizon growth diagnostic of int_R^r (sqrt|q| - sqrt(chi))");
  std::string bq_src, bvhat_src;
  double bfrom = 0.0, bto = 0.0, br_inf = 0.0, btail = 0.0;
  bal->add_option("--q", bq_src, "coefficient q(r), must be <= 0")->required();
  bal->add_option("--vhat", bvhat_src, "weight for the critical curve")->required();
  bal->add_option("--from", bfrom, "lower integration limit R")->required();
  bal->add_option("--to", bto, "horizon r_max")->required();
  bal->add_option("--r-inf", br_inf, "truncation radius for the tail integral")->required();
  bal->add_option("--tail", btail, "analytic tail beyond --r-inf (default 0)");

  auto* list = app.add_subcommand("list", "list the built-in example corpus");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*run)
      return do_run(scn_path, json_out, points, run->count("--seed") > 0, seed, tol_scale,
                    checks_csv, omit_timing);
    if (*chi) return do_chi(vhat_src, at, r_inf, tail);
    if (*lam) return do_lambda1(v_src, q_src, m, radius, grid);
    if (*bal) return do_balance(bq_src, bvhat_src, bfrom, bto, br_inf, btail);
    if (*list) return do_list();
  } catch (const etv::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
