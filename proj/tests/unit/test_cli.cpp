#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(HSL_SIM_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string data(const std::string& name) { return std::string(HSL_TEST_DATA_DIR) + "/" + name; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("hsl_cli_test_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST(Cli, RunIsByteIdenticalAcrossInvocations) {
  const auto a = scratch("a"), b = scratch("b");
  ASSERT_EQ(run("run --config " + data("run_small.ini") + " --out " + a.string()), 0);
  ASSERT_EQ(run("run --config " + data("run_small.ini") + " --out " + b.string()), 0);
  for (const char* f : {"metrics.csv", "final_models.csv"}) {
    ASSERT_TRUE(fs::exists(a / f));
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  EXPECT_TRUE(fs::exists(a / "manifest.txt"));
  EXPECT_NE(slurp(a / "final_models.csv").find("accuracy,"), std::string::npos);
}

TEST(Cli, SeedOverrideChangesResults) {
  const auto a = scratch("seed_a"), b = scratch("seed_b");
  ASSERT_EQ(run("run --config " + data("run_small.ini") + " --out " + a.string()), 0);
  ASSERT_EQ(run("run --config " + data("run_small.ini") + " --seed 12 --out " + b.string()), 0);
  EXPECT_NE(slurp(a / "metrics.csv"), slurp(b / "metrics.csv"));
  EXPECT_NE(slurp(b / "manifest.txt").find("spec = seed = 12"), std::string::npos);
}

TEST(Cli, UsageErrors) {
  EXPECT_NE(run(""), 0);
  EXPECT_NE(run("run"), 0);
  EXPECT_EQ(run("run --config /nonexistent.ini"), 2);
  // The subcommand must match the config's declared command.
  EXPECT_EQ(run("verify --config " + data("run_small.ini") + " --out " + scratch("x").string()),
            2);
}

TEST(Cli, VerifyExitStatusFollowsReports) {
  const auto dir = scratch("verify");
  const int code = run("verify --config " + data("verify_small.ini") + " --out " + dir.string());
  const auto reports = slurp(dir / "reports.csv");
  ASSERT_FALSE(reports.empty());
  const bool any_failed = reports.find(",false\n") != std::string::npos;
  EXPECT_EQ(code, any_failed ? 1 : 0);
}
