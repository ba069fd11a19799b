// Drives the built binary end to end: exit codes, text output, JSON output.
#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

namespace {

struct CmdResult {
  int code;
  std::string out;
};

CmdResult run_cmd(const std::string& cmd) {
  std::string full = cmd + " 2>&1";
  FILE* pipe = popen(full.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  std::array<char, 4096> buf{};
  while (std::size_t n = fread(buf.data(), 1, buf.size(), pipe)) out.append(buf.data(), n);
  int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

const std::string kBin = ETV_CLI_PATH;
const std::string kScen = ETV_SCENARIO_DIR;

std::filesystem::path temp_file(const std::string& name, const std::string& content) {
  auto p = std::filesystem::temp_directory_path() / name;
  std::ofstream out(p);
  out << content;
  return p;
}

std::vector<double> numbers_after(const std::string& text, const std::string& tag) {
  std::vector<double> vals;
  std::size_t pos = 0;
  while ((pos = text.find(tag, pos)) != std::string::npos) {
    pos += tag.size();
    vals.push_back(std::stod(text.substr(pos)));
  }
  return vals;
}

}  // namespace

TEST_CASE("list prints the example corpus") {
  CmdResult r = run_cmd(kBin + " list");
  CHECK(r.code == 0);
  CHECK(r.out.find("gaussian3") != std::string::npos);
  CHECK(r.out.find("sphere4_degenerate") != std::string::npos);
  CHECK(r.out.find("alpha0_warp_exp") != std::string::npos);
  CHECK(r.out.find("chart only") != std::string::npos);
}

TEST_CASE("run: shipped scenarios exit 0 with every line passing or gated") {
  for (const char* scn : {"gaussian3.scn", "sphere4_almost.scn"}) {
    CmdResult r = run_cmd(kBin + " run " + kScen + "/" + scn);
    INFO(scn << "\n" << r.out);
    CHECK(r.code == 0);
    CHECK(r.out.find("->  PASS") != std::string::npos);
    CHECK(r.out.find("fail") == std::string::npos);
  }
}

TEST_CASE("run: a wrong lambda fails the residual check with exit 1") {
  auto p = temp_file("etv_wrong_lambda.scn",
                     "[chart]\ndim = 3\ncoords = x, y, z\n"
                     "g_1_1 = 1\ng_2_2 = 1\ng_3_3 = 1\n"
                     "domain_x = -1, 1\ndomain_y = -1, 1\ndomain_z = -1, 1\n"
                     "[structure]\nbeta = 1\nlambda = 2\nf = (x^2 + y^2 + z^2) / 2\n"
                     "[checks]\nnames = residual\n");
  CmdResult r = run_cmd(kBin + " run " + p.string());
  CHECK(r.code == 1);
  CHECK(r.out.find("fail") != std::string::npos);
}

TEST_CASE("run: malformed input exits 2 with a located error") {
  auto p = temp_file("etv_bad_metric.scn",
                     "[chart]\ndim = 3\ncoords = x, y, z\ng_1_1 = 1 +* x\n");
  CmdResult r = run_cmd(kBin + " run " + p.string());
  CHECK(r.code == 2);
  CHECK(r.out.find("line 4") != std::string::npos);

  CmdResult missing = run_cmd(kBin + " run /no/such/file.scn");
  CHECK(missing.code == 2);
}

TEST_CASE("run: --json emits a parseable report, byte-stable without timing") {
  auto out1 = std::filesystem::temp_directory_path() / "etv_rep1.json";
  auto out2 = std::filesystem::temp_directory_path() / "etv_rep2.json";
  const std::string base = kBin + " run " + kScen + "/flat3_hand.scn --omit-timing --json ";
  REQUIRE(run_cmd(base + out1.string()).code == 0);
  REQUIRE(run_cmd(base + out2.string()).code == 0);

  std::ifstream f1(out1), f2(out2);
  std::string s1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
  std::string s2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
  CHECK(s1 == s2);

  auto j = nlohmann::ordered_json::parse(s1);
  CHECK(j["status"] == "pass");
  CHECK(j["scenario"].get<std::string>().find("flat3_hand") != std::string::npos);
  CHECK(j["tolerances"].contains("residual"));
  CHECK(j["checks"].size() > 10);
}

TEST_CASE("spectral subcommands compute and report input errors") {
  // v = r^2 gives the radial Laplacian on the unit ball: lambda1 = pi^2
  CmdResult l1 = run_cmd(kBin + " spectral lambda1 --v r^2 --radius 1 --grid 400");
  CHECK(l1.code == 0);
  auto l1_vals = numbers_after(l1.out, "lambda1 = ");
  REQUIRE(l1_vals.size() == 1);
  CHECK(l1_vals[0] == Catch::Approx(9.8696044).epsilon(5e-3));

  // vhat = e^{2r}: tail integral e^{-2r}/2, so chi is identically 1
  CmdResult chi = run_cmd(kBin + " spectral chi --vhat 'exp(2*r)' --at 1,2 --r-inf 40");
  CHECK(chi.code == 0);
  auto chi_vals = numbers_after(chi.out, "chi = ");
  REQUIRE(chi_vals.size() == 2);
  CHECK(chi_vals[0] == Catch::Approx(1.0).margin(1e-6));
  CHECK(chi_vals[1] == Catch::Approx(1.0).margin(1e-6));

  CmdResult bal = run_cmd(kBin + " spectral balance --q=-1 --vhat r^2 --from 1 --to 1000 "
                                 "--r-inf 1e6");
  CHECK(bal.code == 0);
  CHECK(bal.out.find("diverging") != std::string::npos);
  CHECK(bal.out.find("not a proof") != std::string::npos);
  auto ivals = numbers_after(bal.out, "slope over the last decade: ");
  REQUIRE(ivals.size() == 1);
  CHECK(ivals[0] > 100.0);  // I grows like r on the last decade (900/ln 10)

  // constant vhat: 1/vhat not integrable, precondition violation, input-error exit
  CmdResult ni = run_cmd(kBin + " spectral chi --vhat 1 --at 2 --r-inf 100");
  CHECK(ni.code == 2);

  // unknown flag: CLI parse error, input-error exit
  CmdResult uf = run_cmd(kBin + " spectral chi --what r^2 --at 1 --r-inf 10");
  CHECK(uf.code == 2);
}
