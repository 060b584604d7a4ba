#include "commands.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace scanopt {
namespace {

namespace fs = std::filesystem;

struct RunResult {
  int code;
  std::string out;
  std::string err;
};

RunResult run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "scanopt");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  const fs::path path = dir / "experiment.cfg";
  std::ofstream(path) << text;
  return path;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::string> manifest_entries(const std::string& stdout_text) {
  const auto pos = stdout_text.rfind("manifest:");
  EXPECT_NE(pos, std::string::npos);
  std::istringstream line(stdout_text.substr(pos + 9));
  std::vector<std::string> files;
  for (std::string f; line >> f;) files.push_back(f);
  return files;
}

TEST(Cli, IlcWritesTwoCsvFiles) {
  const auto dir = testing::scratch_dir("cli_ilc");
  const auto cfg = write_config(dir, "scan.amplitude = 0.01\nscan.period = 16\n");
  const auto r = run_cli({"ilc", "--config", cfg.string(), "--out", (dir / "out").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "out" / "ilc_history.csv"));
  EXPECT_TRUE(fs::exists(dir / "out" / "ilc_trajectory.csv"));
  EXPECT_NE(r.out.find("iterations to tolerance: 1"), std::string::npos) << r.out;
  EXPECT_EQ(manifest_entries(r.out).size(), 2u);
}

TEST(Cli, InvalidPeriodExitsTwoNamingTheKey) {
  const auto dir = testing::scratch_dir("cli_period");
  const auto cfg = write_config(dir, "scan.period = 1\n");
  const auto r = run_cli({"ilc", "--config", cfg.string(), "--out", (dir / "out").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("period"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(dir / "out"));
}

TEST(Cli, UnreadableConfigExitsTwo) {
  const auto r = run_cli({"ilc", "--config", "/nonexistent/experiment.cfg"});
  EXPECT_EQ(r.code, 2);
}

TEST(Cli, UnstableGainExitsThree) {
  const auto dir = testing::scratch_dir("cli_diverge");
  const auto cfg = write_config(
      dir, "ilc.law = transpose\nilc.gain_fraction = 10\nilc.max_model_iters = 200\n");
  const auto r = run_cli({"ilc", "--config", cfg.string(), "--out", (dir / "out").string()});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("diverge"), std::string::npos) << r.err;
}

TEST(Cli, OptimizeShippedConfig) {
  const auto dir = testing::scratch_dir("cli_optimize");
  const auto r = run_cli({"optimize", "--config", testing::source_path("configs/default.cfg").string(),
                          "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream table(slurp(dir / "optimize_table.csv"));
  std::size_t lines = 0;
  for (std::string line; std::getline(table, line);) ++lines;
  EXPECT_EQ(lines, 1u + 25u);
  EXPECT_TRUE(fs::exists(dir / "best_recon.pgm"));
  EXPECT_TRUE(fs::exists(dir / "summary.txt"));
  for (const auto& f : manifest_entries(r.out)) EXPECT_TRUE(fs::exists(f)) << f;
}

TEST(Cli, OptimizeIsByteIdenticalOnRerun) {
  const auto dir = testing::scratch_dir("cli_rerun");
  const auto cfg = write_config(dir, "imaging.size = 64\noptimize.amplitudes = 0, 0.005\n"
                                     "optimize.periods = 16, 32\nimaging.noise_sigma = 0.01\n");
  ASSERT_EQ(run_cli({"optimize", "--config", cfg.string(), "--out", (dir / "a").string()}).code, 0);
  ASSERT_EQ(run_cli({"optimize", "--config", cfg.string(), "--out", (dir / "b").string()}).code, 0);
  EXPECT_EQ(slurp(dir / "a" / "optimize_table.csv"), slurp(dir / "b" / "optimize_table.csv"));
  EXPECT_EQ(slurp(dir / "a" / "best_recon.pgm"), slurp(dir / "b" / "best_recon.pgm"));
}

TEST(Cli, ZeroLimitsExitFour) {
  const auto dir = testing::scratch_dir("cli_limits");
  const auto cfg = write_config(dir, "limits.max_velocity = 0\nlimits.max_acceleration = 0\n"
                                     "limits.time_budget = 0\n");
  const auto r = run_cli({"optimize", "--config", cfg.string(), "--out", dir.string()});
  EXPECT_EQ(r.code, 4) << r.err;
}

TEST(Cli, SimdemoPrintsDoubling) {
  const auto dir = testing::scratch_dir("cli_sim");
  const auto r = run_cli({"simdemo", "--config", testing::source_path("configs/simdemo.cfg").string(),
                          "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto pos = r.out.find("extension factor: ");
  ASSERT_NE(pos, std::string::npos);
  EXPECT_NEAR(std::stod(r.out.substr(pos + 18)), 2.0, 1e-6);
  EXPECT_TRUE(fs::exists(dir / "sim_signals.csv"));
  EXPECT_TRUE(fs::exists(dir / "sim_spectra.csv"));
}

TEST(Cli, SimdemoDegenerateMixingExitsThree) {
  const auto dir = testing::scratch_dir("cli_sim_bad");
  for (const std::string text : {"sim.m = 0\n", "sim.phases = 0, 2pi/3, 2pi/3\n"}) {
    const auto cfg = write_config(dir, text);
    const auto r = run_cli({"simdemo", "--config", cfg.string(), "--out", dir.string()});
    EXPECT_EQ(r.code, 3) << text << r.err;
  }
}

TEST(Cli, ReconstructWritesSceneFramesAndRecon) {
  const auto dir = testing::scratch_dir("cli_recon");
  const auto cfg = write_config(dir, "imaging.size = 64\nimaging.scene = bars\n");
  const auto r = run_cli({"reconstruct", "--config", cfg.string(), "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto files = manifest_entries(r.out);
  EXPECT_EQ(files.size(), 1u + 4u + 1u + 1u);
  for (const auto& f : files) EXPECT_TRUE(fs::exists(f)) << f;
}

TEST(Cli, SeedOverrideChangesNoisyOutput) {
  const auto dir = testing::scratch_dir("cli_seed");
  const auto cfg = write_config(dir, "imaging.size = 32\nimaging.noise_sigma = 0.05\n");
  ASSERT_EQ(run_cli({"reconstruct", "--config", cfg.string(), "--out", (dir / "a").string(),
                     "--seed", "5"}).code, 0);
  ASSERT_EQ(run_cli({"reconstruct", "--config", cfg.string(), "--out", (dir / "b").string(),
                     "--seed", "6"}).code, 0);
  EXPECT_NE(slurp(dir / "a" / "recon.pgm"), slurp(dir / "b" / "recon.pgm"));
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run_cli({}).code, 2);
  EXPECT_EQ(run_cli({"frobnicate"}).code, 2);
  EXPECT_EQ(run_cli({"ilc", "--seed", "abc"}).code, 2);
  EXPECT_EQ(run_cli({"--help"}).code, 0);
}

}  // namespace
}  // namespace scanopt
