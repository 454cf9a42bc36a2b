#include "app.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using panelfx::cli::run;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t data_rows(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::size_t n = 0;
  std::getline(in, line);
  while (std::getline(in, line)) n += !line.empty();
  return n;
}

}  // namespace

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    root = fs::temp_directory_path() / (std::string("panelfx_cli_") + info->name());
    fs::remove_all(root);
    fs::create_directories(root);
    config = root / "run.cfg";
    write_config("[simulate]\nn_treated = 6\nn_control = 10\neffect_delta = -0.1\n");
  }
  void TearDown() override { fs::remove_all(root); }

  void write_config(const std::string& text) { std::ofstream(config) << text; }

  int cli(std::vector<std::string> args) {
    std::vector<const char*> argv{"panelfx"};
    for (const auto& a : args) argv.push_back(a.c_str());
    out.str("");
    err.str("");
    return run(static_cast<int>(argv.size()), argv.data(), out, err);
  }

  fs::path root;
  fs::path config;
  std::ostringstream out, err;
};

TEST_F(CliTest, SimulateIsByteIdenticalForSeed) {
  ASSERT_EQ(cli({"simulate", "--config", config.string(), "--out", (root / "a").string(), "--seed", "7"}), 0) << err.str();
  ASSERT_EQ(cli({"simulate", "--config", config.string(), "--out", (root / "b").string(), "--seed", "7", "--threads", "3"}), 0);
  EXPECT_EQ(slurp(root / "a" / "panel.csv"), slurp(root / "b" / "panel.csv"));
  EXPECT_EQ(slurp(root / "a" / "ground_truth.json"), slurp(root / "b" / "ground_truth.json"));
  ASSERT_EQ(cli({"simulate", "--config", config.string(), "--out", (root / "c").string(), "--seed", "8"}), 0);
  EXPECT_NE(slurp(root / "a" / "panel.csv"), slurp(root / "c" / "panel.csv"));
}

TEST_F(CliTest, EstimateRowsPerInstanceMetricWindow) {
  const auto dir = (root / "o").string();
  ASSERT_EQ(cli({"simulate", "--config", config.string(), "--out", dir}), 0) << err.str();
  ASSERT_EQ(cli({"estimate", "--config", config.string(), "--out", dir, "--windows", "3m,12m"}), 0) << err.str();
  const auto skipped = data_rows(root / "o" / "skipped.csv");
  EXPECT_EQ(data_rows(root / "o" / "effects.csv"), 6u * 5u * 2u - skipped * 2u);
  EXPECT_TRUE(fs::exists(root / "o" / "estimate.manifest.json"));
  EXPECT_TRUE(fs::exists(root / "o" / "recovery.json"));
  const auto echoed = slurp(root / "o" / "estimate.config.resolved");
  EXPECT_NE(echoed.find("windows = 3m,12m"), std::string::npos);
  EXPECT_NE(echoed.find("simulate.n_treated = 6"), std::string::npos);
}

TEST_F(CliTest, FullChainRuns) {
  const auto dir = (root / "o").string();
  for (const char* cmd : {"simulate", "ingest", "estimate", "intensity", "cohorts", "revenue", "report"}) {
    EXPECT_EQ(cli({cmd, "--config", config.string(), "--out", dir}), 0) << cmd << ": " << err.str();
    EXPECT_TRUE(fs::exists(root / "o" / (std::string(cmd) + ".manifest.json"))) << cmd;
  }
  EXPECT_TRUE(fs::exists(root / "o" / "revenue_ecommerce.json"));
  EXPECT_TRUE(fs::exists(root / "o" / "table_quantity.csv"));
}

TEST_F(CliTest, ReportWithoutEstimatesExits2) {
  EXPECT_EQ(cli({"report", "--config", config.string(), "--out", (root / "empty").string()}), 2);
  EXPECT_NE(err.str().find("effects.csv"), std::string::npos) << err.str();
  EXPECT_NE(err.str().find("not found"), std::string::npos);
}

TEST_F(CliTest, MissingConfigExits2) {
  EXPECT_EQ(cli({"simulate", "--config", (root / "nope.cfg").string()}), 2);
  EXPECT_NE(err.str().find("nope.cfg"), std::string::npos);
}

TEST_F(CliTest, BadValueExits3NamingField) {
  write_config("[donors]\nk = many\n");
  EXPECT_EQ(cli({"estimate", "--config", config.string(), "--out", root.string()}), 3);
  EXPECT_NE(err.str().find("donors.k"), std::string::npos) << err.str();
  write_config("[simulate]\nn_treeted = 4\n");
  EXPECT_EQ(cli({"simulate", "--config", config.string(), "--out", root.string()}), 3);
  EXPECT_NE(err.str().find("simulate.n_treeted"), std::string::npos);
  write_config("");
  EXPECT_EQ(cli({"simulate", "--config", config.string(), "--out", root.string(), "--windows", "5m"}), 3);
  EXPECT_NE(err.str().find("windows"), std::string::npos);
}

TEST_F(CliTest, EnvironmentSetsDefaultOutput) {
  const auto dir = root / "env_out";
  ::setenv("PANELFX_OUT_DIR", dir.c_str(), 1);
  const int rc = cli({"simulate", "--config", config.string()});
  ::unsetenv("PANELFX_OUT_DIR");
  ASSERT_EQ(rc, 0) << err.str();
  EXPECT_TRUE(fs::exists(dir / "panel.csv"));
}

TEST_F(CliTest, UnknownCommandIsUsageError) {
  EXPECT_EQ(cli({"frobnicate", "--config", config.string()}), 64);
}
