#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "qfconv/cli.hpp"

using namespace qfconv;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  args.insert(args.begin(), "qfconv");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::path(QFCONV_TEST_TMP) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, kExitUsage);
  EXPECT_EQ(run({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(run({"sweep"}).code, kExitUsage);
  EXPECT_EQ(run({"sweep", "--preset", "fig9z"}).code, kExitUsage);
  EXPECT_EQ(run({"simulate", "--shots", "many"}).code, kExitUsage);
}

TEST(Cli, HelpIsSuccess) { EXPECT_EQ(run({"--help"}).code, kExitOk); }

TEST(Cli, ValidationErrors) {
  const fs::path dir = scratch("cli_validation");
  const CliRun gate = run({"simulate", "--gate", "37", "--shots", "100", "--out", dir.string()});
  EXPECT_EQ(gate.code, kExitValidation);
  EXPECT_NE(gate.err.find("gate"), std::string::npos) << gate.err;
  EXPECT_EQ(run({"simulate", "--config", (dir / "absent.cfg").string()}).code, kExitValidation);
  EXPECT_EQ(run({"simulate", "--mu", "-1", "--shots", "100", "--out", dir.string()}).code, kExitValidation);

  std::ofstream(dir / "broken.cfg") << "[pump]\npump_power = 1 lightyear\n";
  const CliRun broken = run({"simulate", "--config", (dir / "broken.cfg").string()});
  EXPECT_EQ(broken.code, kExitValidation);
  EXPECT_NE(broken.err.find("line 2"), std::string::npos) << broken.err;
}

TEST(Cli, NumericalError) {
  const fs::path dir = scratch("cli_numerical");
  std::ofstream(dir / "no_crossing.csv") << "mu_in,snr\n2,2.8\n3,4.3\n4,5.7\n5,7.1\n";
  const CliRun r = run({"fit", "--input", (dir / "no_crossing.csv").string(), "--model", "mu1", "--out", dir.string()});
  EXPECT_EQ(r.code, kExitNumerical) << r.err;
}

TEST(Cli, SimulateIsDeterministic) {
  const fs::path a = scratch("cli_sim_a");
  const fs::path b = scratch("cli_sim_b");
  ASSERT_EQ(run({"simulate", "--shots", "20000", "--seed", "7", "--out", a.string()}).code, kExitOk);
  ASSERT_EQ(run({"simulate", "--shots", "20000", "--seed", "7", "--out", b.string()}).code, kExitOk);
  for (const char* f : {"simulate.csv", "clicks.csv", "simulate.json"}) {
    ASSERT_TRUE(fs::exists(a / f)) << f;
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  EXPECT_NE(slurp(a / "simulate.json").find("\"config_hash\""), std::string::npos);
}

TEST(Cli, SweepWritesPresetTable) {
  const fs::path dir = scratch("cli_sweep");
  const CliRun r = run({"sweep", "--preset", "fig3b", "--shots", "20000", "--out", dir.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const std::string csv = slurp(dir / "fig3b.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "P_p_mW,eta_ext,eta_ext_ci_lo,eta_ext_ci_hi,snr_dc");
  EXPECT_TRUE(fs::exists(dir / "fig3b_fit.csv"));
  EXPECT_TRUE(fs::exists(dir / "fig3b.json"));
}

TEST(Cli, FitFromCsv) {
  const fs::path dir = scratch("cli_fit");
  std::ofstream(dir / "line.csv") << "bandwidth_nm,mu1\n0.5,0.5\n1.0,1.0\n1.5,1.5\n2.0,2.0\n";
  const CliRun r = run({"fit", "--input", (dir / "line.csv").string(), "--model", "linear0", "--out", dir.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(slurp(dir / "fit.csv").find("slope,1,"), std::string::npos) << slurp(dir / "fit.csv");
}

TEST(Cli, QuickReportHasEfficiencyRow) {
  const fs::path dir = scratch("cli_report");
  const CliRun r = run({"report", "--quick", "--out", dir.string()});
  EXPECT_EQ(r.code, kExitOk);
  const std::string csv = slurp(dir / "report.csv");
  const auto pos = csv.find("eta_tot_max");
  ASSERT_NE(pos, std::string::npos);
  const std::string line = csv.substr(pos, csv.find('\n', pos) - pos);
  EXPECT_NE(line.find("PASS"), std::string::npos) << line;
}
