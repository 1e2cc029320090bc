#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "spde/cli.hpp"

namespace fs = std::filesystem;

namespace {

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "spde_lab");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return spde::cli_main(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("spde_cli_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST(Cli, ConstantsJson) {
  testing::internal::CaptureStdout();
  EXPECT_EQ(run({"constants", "--nu", "1.0"}), 0);
  const auto j = spde::Json::parse(testing::internal::GetCapturedStdout());
  EXPECT_DOUBLE_EQ(j.at("white_noise_constant").get<double>(), 0.5);
}

TEST(Cli, PathSamplingCheck) {
  testing::internal::CaptureStdout();
  EXPECT_EQ(run({"path-sampling", "--potential", "0,0,0,0,0.25", "--T", "1.0", "--check"}), 0);
  const auto j = spde::Json::parse(testing::internal::GetCapturedStdout());
  EXPECT_LT(j.at("max_identity_discrepancy").get<double>(), 1e-10);
}

TEST(Cli, UsageAndConfigErrors) {
  testing::internal::CaptureStderr();
  testing::internal::CaptureStdout();
  EXPECT_EQ(run({"frobnicate"}), 1);
  EXPECT_EQ(run({"converge", "--bogus"}), 1);
  EXPECT_EQ(run({"converge", "--config", "/nonexistent/cfg.json"}), 1);
  EXPECT_EQ(run({"converge", "--set", "replica=3"}), 1);
  EXPECT_EQ(run({"converge", "--eps", "2.0"}), 1);
  EXPECT_EQ(run({"path-sampling"}), 1);
  testing::internal::GetCapturedStdout();
  testing::internal::GetCapturedStderr();
}

TEST(Cli, ConvergeIsReproducible) {
  const fs::path a = scratch_dir("a"), b = scratch_dir("b");
  const std::vector<std::string> common{"converge", "--eps", "0.5,0.25,0.125,0.0625", "--replicas", "2", "--T", "0.05",
                                        "--dt", "0.01", "--mode-product", "4", "--prefix", "run"};
  auto with = [&](const fs::path& dir, const std::string& threads) {
    std::vector<std::string> args = common;
    args.insert(args.end(), {"--output-dir", dir.string(), "--threads", threads});
    return args;
  };
  testing::internal::CaptureStdout();
  ASSERT_EQ(run(with(a, "1")), 0);
  ASSERT_EQ(run(with(b, "3")), 0);
  testing::internal::GetCapturedStdout();
  EXPECT_EQ(slurp(a / "run.csv"), slurp(b / "run.csv"));
  auto j = spde::Json::parse(slurp(a / "run.json"));
  auto k = spde::Json::parse(slurp(b / "run.json"));
  j["config"]["output"].erase("dir");
  k["config"]["output"].erase("dir");
  EXPECT_EQ(j.dump(), k.dump());
  EXPECT_EQ(j.at("schema_version"), 1);
  EXPECT_EQ(j.at("config").at("replicas"), 2);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Cli, ConfigFileAndSetOverride) {
  const fs::path d = scratch_dir("cfg");
  {
    std::ofstream out(d / "c.json");
    out << R"({"eps_grid": [0.5, 0.25, 0.125], "replicas": 2, "final_time": 0.25, "output": {"prefix": "p"}})";
  }
  testing::internal::CaptureStdout();
  ASSERT_EQ(run({"psi-coupling", "--config", (d / "c.json").string(), "--set", "replicas=3", "--output-dir",
                 d.string()}),
            0);
  testing::internal::GetCapturedStdout();
  const auto j = spde::Json::parse(slurp(d / "p.json"));
  EXPECT_EQ(j.at("config").at("replicas"), 3);
  EXPECT_TRUE(fs::exists(d / "p.csv"));
  fs::remove_all(d);
}

TEST(Cli, SimulateWritesTimeSeries) {
  const fs::path d = scratch_dir("sim");
  testing::internal::CaptureStdout();
  ASSERT_EQ(run({"simulate", "--eps", "0.25", "--T", "0.05", "--dt", "0.01", "--output-dir", d.string(), "--prefix",
                 "s", "--export-trajectory"}),
            0);
  testing::internal::GetCapturedStdout();
  const std::string csv = slurp(d / "s.csv");
  EXPECT_EQ(csv.rfind("time,statistic,value\n", 0), 0u);
  fs::remove_all(d);
}

TEST(Cli, ShippedConfigsParse) {
  int seen = 0;
  for (const auto& entry : fs::directory_iterator(SPDE_CONFIG_DIR)) {
    if (entry.path().extension() != ".json") continue;
    const spde::Json j = spde::load_json_file(entry.path().string());
    spde::RunConfig c = spde::default_config(j.at("study").get<std::string>());
    EXPECT_NO_THROW({
      spde::apply_json(c, j);
      spde::validate(c);
      spde::build_model(c.model);
    }) << entry.path();
    ++seen;
  }
  EXPECT_GE(seen, 5);
}
