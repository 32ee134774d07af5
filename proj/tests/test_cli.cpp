#include "fgle/cli.hpp"

#include "json.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace fgle;

namespace {

struct CliRun {
  int code;
  std::string out, err;
};

CliRun run(std::vector<std::string> args) {
  args.insert(args.begin(), "fgle");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(int(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string tmp(const std::string& name) {
  const auto dir = std::filesystem::path(FGLE_TEST_TMP) / name;
  std::filesystem::remove_all(dir);
  return dir.string();
}

}  // namespace

TEST(Cli, SoeCertifies) {
  const std::string dir = tmp("cli_soe");
  const CliRun r = run({"soe", "--alpha", "0.5", "--eps", "1e-6", "--kappa", "1e-3", "-o", dir});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto report = nlohmann::json::parse(r.out);
  EXPECT_TRUE(report["certified"].get<bool>());
  EXPECT_LE(report["max_error"].get<double>(), 1e-6);
  EXPECT_TRUE(std::filesystem::exists(std::filesystem::path(dir) / "soe.json"));
  EXPECT_TRUE(std::filesystem::exists(std::filesystem::path(dir) / "manifest.json"));
}

TEST(Cli, MissingConfigIsValidationError) {
  const CliRun r = run({"strong-order", "--config", tmp("absent") + "/config.json"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("config.json"), std::string::npos);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"nonsense"}).code, 1);
  EXPECT_EQ(run({"soe", "--alpha", "half"}).code, 1);
  EXPECT_EQ(run({"simulate", "--hurst", "0.4", "-o", tmp("bad_hurst")}).code, 1);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(Cli, NumericalFailureExitCode) {
  const CliRun r = run({"simulate", "--drift", "linear(1e200)", "--sigma", "0", "--x0", "1", "--n-steps", "16",
                        "-o", tmp("blowup")});
  EXPECT_EQ(r.code, 2) << r.err;
  EXPECT_NE(r.err.find("numerical"), std::string::npos);
}

TEST(Cli, ConfigFileAndOverrides) {
  const std::string dir = tmp("cli_config");
  std::filesystem::create_directories(dir);
  const std::string cfg = dir + "/run.json";
  std::ofstream(cfg) << R"({"hurst": 0.6, "alpha": 0.9, "n_steps": 8, "out_dir": ")" << dir << R"(/from_file"})";
  CliRun r = run({"simulate", "--config", cfg, "--n-steps", "4"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(nlohmann::json::parse(r.out)["n_steps"], 4);
  EXPECT_TRUE(std::filesystem::exists(dir + "/from_file/path.csv"));

  ::setenv(kOutDirEnv, (dir + "/from_env").c_str(), 1);
  r = run({"simulate", "--config", cfg});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(std::filesystem::exists(dir + "/from_env/path.csv"));
  r = run({"simulate", "--config", cfg, "-o", dir + "/from_flag"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(std::filesystem::exists(dir + "/from_flag/path.csv"));
  ::unsetenv(kOutDirEnv);

  std::ofstream(cfg) << R"({"hurts": 0.6})";
  EXPECT_EQ(run({"simulate", "--config", cfg}).code, 1);
}
