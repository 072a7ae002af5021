#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "glbandit/harness.hpp"

using namespace glb;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small_config(const std::string& extra = "") {
  return experiment_config_from(KeyValueConfig::parse_string(
      "experiment = sim2d\npolicies = sw_glucb, d_linucb\nruns = 3\nhorizon = 300\nsnapshot_interval = 100\nthreads = 1\n" +
      extra));
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("glbandit_harness_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST(Config, ParsesKeysAndComments) {
  const auto kv = KeyValueConfig::parse_string("# comment\n runs = 7 \npolicies = glucb,linucb # trailing\ndelta=0.1\n");
  const auto c = experiment_config_from(kv);
  EXPECT_EQ(c.runs, 7);
  EXPECT_EQ(c.policies, (std::vector<std::string>{"glucb", "linucb"}));
  EXPECT_DOUBLE_EQ(c.delta, 0.1);
  EXPECT_EQ(c.radius, RadiusMode::theoretical);
}

TEST(Config, RejectsBadInput) {
  auto bad = [](const std::string& text) { return experiment_config_from(KeyValueConfig::parse_string(text)); };
  EXPECT_THROW(bad("no equals sign\n"), ConfigError);
  EXPECT_THROW(bad("runs = 0\n"), ConfigError);
  EXPECT_THROW(bad("runs = three\n"), ConfigError);
  EXPECT_THROW(bad("delta = 1.5\n"), ConfigError);
  EXPECT_THROW(bad("policies = glucb, thompson\n"), ConfigError);
  EXPECT_THROW(bad("colour = blue\n"), ConfigError);
  EXPECT_THROW(bad("experiment = nope\n"), ConfigError);
  EXPECT_THROW(bad("radius = loose\n"), ConfigError);
  EXPECT_THROW(bad("tuning = manual\npolicies = sw_glucb\n"), ConfigError);
  EXPECT_THROW(bad("horizon = 6001\n"), ConfigError);
  EXPECT_THROW(bad("tau = 0\n"), ConfigError);
  EXPECT_THROW(bad("gamma = 1\n"), ConfigError);
  EXPECT_NO_THROW(bad("tuning = manual\npolicies = sw_glucb, d_glucb\ntau = 50\ngamma = 0.99\n"));
  EXPECT_NO_THROW(bad("tuning = manual\npolicies = sw_glucb\nsw_glucb.tau = 50\n"));
  EXPECT_THROW(KeyValueConfig::load("/nonexistent/x.cfg"), ConfigError);
}

TEST(Quantile, LinearInterpolation) {
  std::vector<double> v{4, 1, 3, 2};
  EXPECT_DOUBLE_EQ(quantile(v, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(quantile(v, 1.0), 4.0);
  EXPECT_DOUBLE_EQ(quantile(v, 0.5), 2.5);
  EXPECT_NEAR(quantile(v, 0.05), 1.15, 1e-15);
  std::vector<double> one{7};
  EXPECT_EQ(quantile(one, 0.95), 7.0);
  std::vector<double> none;
  EXPECT_THROW(quantile(none, 0.5), InvalidArgument);
}

TEST(Harness, CsvRowCounts) {
  auto cfg = small_config();
  cfg.runs = 1;
  cfg.horizon = 3;
  const auto res = run_experiment(cfg);
  ASSERT_TRUE(res.failures.empty());
  const fs::path dir = scratch("rows");
  const auto files = emit_csv(res, dir);
  EXPECT_EQ(files.size(), 3u);
  EXPECT_EQ(line_count(slurp(dir / "regret_mean_quantiles.csv")), 1u + 2 * 3);
  EXPECT_EQ(line_count(slurp(dir / "regret.csv")), 1u + 2 * 3);
  EXPECT_EQ(slurp(dir / "regret.csv").substr(0, 49), "run,round,policy,reward,regret,cumulative_regret\n");
  // one run: the band collapses onto the mean
  for (const auto& band : res.regret)
    for (std::size_t t = 0; t < band.mean.size(); ++t) {
      EXPECT_EQ(band.q05[t], band.mean[t]);
      EXPECT_EQ(band.q95[t], band.mean[t]);
    }
  fs::remove_all(dir);
}

TEST(Harness, CumulativeRegretAndBands) {
  const auto cfg = small_config();
  const auto res = run_experiment(cfg);
  ASSERT_EQ(res.runs.size(), 3u);
  for (const auto& run : res.runs)
    for (const auto& tr : run.traces) {
      ASSERT_EQ(tr.cumulative_regret.size(), 300u);
      double acc = 0.0;
      for (std::size_t t = 0; t < tr.regret.size(); ++t) {
        ASSERT_GE(tr.regret[t], 0.0);
        acc += tr.regret[t];
        ASSERT_NEAR(tr.cumulative_regret[t], acc, 1e-9);
        if (t) ASSERT_GE(tr.cumulative_regret[t], tr.cumulative_regret[t - 1]);
      }
      EXPECT_EQ(tr.snapshot_round, (std::vector<std::int64_t>{100, 200, 300}));
    }
  for (std::size_t p = 0; p < res.regret.size(); ++p)
    for (std::size_t t = 0; t < 300; ++t) {
      const auto& b = res.regret[p];
      ASSERT_LE(b.q05[t], b.mean[t] + 1e-12);
      ASSERT_GE(b.q95[t], b.mean[t] - 1e-12);
      double sum = 0.0;
      for (const auto& run : res.runs) sum += run.traces[p].cumulative_regret[t];
      ASSERT_NEAR(b.mean[t], sum / 3.0, 1e-12);
    }
}

TEST(Harness, OutputIndependentOfRepeatsAndThreads) {
  auto cfg = small_config();
  const fs::path a = scratch("a"), b = scratch("b"), c = scratch("c");
  emit_csv(run_experiment(cfg), a);
  emit_csv(run_experiment(cfg), b);
  cfg.threads = 3;
  emit_csv(run_experiment(cfg), c);
  for (const char* f : {"regret.csv", "regret_mean_quantiles.csv", "theta_snapshots.csv"}) {
    const std::string x = slurp(a / f);
    EXPECT_FALSE(x.empty());
    EXPECT_EQ(x, slurp(b / f)) << f;
    EXPECT_EQ(x, slurp(c / f)) << f;
  }
  for (const auto& p : {a, b, c}) fs::remove_all(p);
}

TEST(Harness, DifferentSeedsDiffer) {
  auto cfg = small_config();
  const auto r1 = run_experiment(cfg);
  cfg.base_seed = 99;
  const auto r2 = run_experiment(cfg);
  EXPECT_NE(r1.regret[0].mean, r2.regret[0].mean);
}

TEST(Harness, ReplayOnSyntheticData) {
  const auto cfg = experiment_config_from(KeyValueConfig::parse_string(
      "experiment = replay\npolicies = glucb, sw_glucb\nruns = 2\nhorizon = 120\ninvert_at = 60\nthreads = 1\n"
      "synthetic_positives = 40\nsynthetic_negatives = 60\nsnapshot_interval = 0\n"));
  const auto res = run_experiment(cfg);
  ASSERT_TRUE(res.failures.empty());
  ASSERT_EQ(res.detection.size(), 2u);
  for (const auto& band : res.detection)
    for (double m : band.mean) {
      ASSERT_GE(m, 0.0);
      ASSERT_LE(m, 1.0);
    }
  const fs::path dir = scratch("replay");
  const auto files = emit_csv(res, dir);
  EXPECT_EQ(files.size(), 4u);
  EXPECT_EQ(line_count(slurp(dir / "detection_proportion.csv")), 1u + 2 * 120);
  fs::remove_all(dir);
}

TEST(Harness, ManifestRecordsConfig) {
  const auto kv = KeyValueConfig::parse_string("runs = 2\nhorizon = 10\npolicies = glucb\n");
  const auto cfg = experiment_config_from(kv);
  const fs::path dir = scratch("manifest");
  write_manifest(dir, kv, cfg);
  const std::string m = slurp(dir / "manifest.txt");
  EXPECT_NE(m.find("software_version=" + std::string(kVersion)), std::string::npos);
  EXPECT_NE(m.find("config_hash="), std::string::npos);
  EXPECT_NE(m.find("\nruns=2\n"), std::string::npos);
  fs::remove_all(dir);
}

#ifdef GLB_BENCH_PATH
TEST(Cli, ExitCodes) {
  const fs::path dir = scratch("cli");
  fs::create_directories(dir);
  const fs::path good = dir / "good.cfg", bad = dir / "bad.cfg", conc = dir / "conc.cfg";
  std::ofstream(good) << "policies = glucb\nruns = 1\nhorizon = 20\n";
  std::ofstream(bad) << "policies = glucb\nbogus = 1\n";
  std::ofstream(conc) << "experiment = concentration\nreplications = 20\nhorizon = 50\ndelta = 0.1\n";
  auto run = [&](const std::string& args) {
    const int status = std::system((std::string(GLB_BENCH_PATH) + " " + args + " > /dev/null 2>&1").c_str());
    return WEXITSTATUS(status);
  };
  EXPECT_EQ(run("run --config " + good.string() + " --out " + (dir / "out").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "out" / "regret.csv"));
  EXPECT_TRUE(fs::exists(dir / "out" / "manifest.txt"));
  EXPECT_EQ(run("run --config " + bad.string() + " --out " + (dir / "out2").string()), 2);
  EXPECT_EQ(run("run --config " + (dir / "missing.cfg").string()), 2);
  EXPECT_EQ(run("run --config " + good.string() + " --policy nosuch --out " + (dir / "out3").string()), 2);
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run("validate-concentration --config " + conc.string() + " --out " + (dir / "conc").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "conc" / "concentration.csv"));
  fs::remove_all(dir);
}
#endif
