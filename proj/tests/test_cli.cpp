#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "ctrap/io.hpp"

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(CTRAP_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("ctrap_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Cli, WeightsSecondKernel) {
  const auto dir = scratch("weights");
  const auto cfg = dir / "cfg.json";
  std::ofstream(cfg) << R"({"kernel":{"type":"monomial","alpha":[1,0,0],"r":2},"n":3,"p":1,"h_base":0.0625,"output":")"
                     << (dir / "out").string() << "\"}";
  EXPECT_EQ(run("weights " + cfg.string()), 0);
  const auto csv = slurp(dir / "out" / "weights.csv");
  EXPECT_NE(csv.find("\"(±1,0,0)\",0.16666666666"), std::string::npos) << csv;
  const auto j = ctrap::read_json_file((dir / "out" / "weights.json").string());
  EXPECT_NEAR(j["weights"][0].get<double>(), 1.0 / 6.0, 1e-10);
  EXPECT_TRUE(j["gate_passed"].get<bool>());
}

TEST(Cli, GateFailureExitsOne) {
  const auto dir = scratch("gate");
  const auto cfg = dir / "cfg.json";
  std::ofstream(cfg) << R"({"kernel":{"alpha":[1,0,0],"r":2},"p":1,"h_base":0.125,"gate":1e-30,"output":")"
                     << (dir / "out").string() << "\"}";
  EXPECT_EQ(run("weights " + cfg.string()), 1);
}

TEST(Cli, MalformedConfig) {
  const auto dir = scratch("malformed");
  const auto cfg = dir / "cfg.json";
  std::ofstream(cfg) << R"({"kernel":{"alpha":[1,0,0],"r":2},"p":)";
  EXPECT_EQ(run("weights " + cfg.string()), 2);
  EXPECT_FALSE(fs::exists(dir / "weights.json"));
  std::ofstream(cfg) << R"({"kernel":{"alpha":[2,0,0],"r":9},"p":1,"output":")" << dir.string() << "\"}";
  EXPECT_EQ(run("weights " + cfg.string()), 2);
  EXPECT_FALSE(fs::exists(dir / "weights.json"));
  EXPECT_EQ(run("bogus"), 2);
  EXPECT_EQ(run(""), 2);
}

TEST(Cli, Converge) {
  const auto dir = scratch("converge");
  const auto cfg = dir / "cfg.json";
  std::ofstream(cfg) << R"({"kernel":{"alpha":[1,0,0],"r":2},"p":1,"h_base":0.125,"h_ladder":[0.125,0.0625,0.03125],"output":")"
                     << dir.string() << "\"}";
  EXPECT_EQ(run("converge " + cfg.string()), 0);
  const auto csv = slurp(dir / "converge.csv");
  EXPECT_EQ(csv.rfind("h,Q,abs_error\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
}

TEST(Cli, ConvergeMissingTable) {
  const auto dir = scratch("missing");
  const auto cfg = dir / "cfg.json";
  std::ofstream(cfg) << R"({"kernel":{"alpha":[1,0,0],"r":2},"p":1,"table":")" << (dir / "nope.json").string()
                     << R"(","output":")" << dir.string() << "\"}";
  EXPECT_EQ(run("converge " + cfg.string()), 1);
}

TEST(Cli, VerifyDefault) {
  const auto dir = scratch("verify");
  EXPECT_EQ(run("verify --skip-parity -o " + dir.string()), 0);
  const auto j = ctrap::read_json_file((dir / "verify.json").string());
  EXPECT_TRUE(j["passed"].get<bool>());
  EXPECT_EQ(j["suites"].size(), 3u);
}

TEST(Cli, VerifyInjectedFault) {
  const auto dir = scratch("fault");
  EXPECT_EQ(run("verify --skip-parity --inject-fault -o " + dir.string()), 1);
  const auto j = ctrap::read_json_file((dir / "verify.json").string());
  EXPECT_FALSE(j["suites"][0]["passed"].get<bool>());
  EXPECT_NE(j["suites"][0]["failures"][0].get<std::string>().find(" at ("), std::string::npos);
}
