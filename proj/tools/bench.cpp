// bench: experiment runner for the non-stationary GLM bandit library.
//
//   bench run --config <path> [--policy NAME]... [--runs N] [--seed N] [--out DIR]
//   bench validate-concentration --config <path> [--out DIR]
//   bench synth-replay --out <csv> [--seed N]
//
// Exit codes: 0 success, 2 configuration error, 3 runtime failure (including
// failed runs and a failed coverage check).

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

#include "glbandit/glbandit.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

struct RunOptions {
  std::string config;
  std::vector<std::string> policies;
  std::optional<std::int64_t> runs;
  std::optional<std::int64_t> seed;
  std::string out;
};

glb::KeyValueConfig load_with_overrides(const RunOptions& o) {
  auto kv = glb::KeyValueConfig::load(o.config);
  if (!o.policies.empty()) {
    std::string joined;
    for (const auto& p : o.policies) joined += (joined.empty() ? "" : ",") + p;
    kv.set("policies", joined);
  }
  if (o.runs) kv.set("runs", std::to_string(*o.runs));
  if (o.seed) kv.set("base_seed", std::to_string(*o.seed));
  if (!o.out.empty()) kv.set("output_dir", o.out);
  return kv;
}

int cmd_run(const RunOptions& o) {
  glb::KeyValueConfig kv;
  glb::ExperimentConfig cfg;
  try {
    kv = load_with_overrides(o);
    cfg = glb::experiment_config_from(kv);
    if (cfg.experiment == glb::ExperimentKind::concentration)
      throw glb::ConfigError("experiment = concentration: use 'bench validate-concentration'");
  } catch (const glb::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  }
  try {
    const auto result = glb::run_experiment(cfg);
    for (const auto& f : result.failures)
      std::cerr << "run " << f.run << " (seed " << f.seed << ", policy " << f.policy << ") failed: " << f.message << "\n";
    if (!result.runs.empty()) glb::emit_csv(result, cfg.output_dir);
    glb::write_manifest(cfg.output_dir, kv, cfg, &result);
    for (std::size_t p = 0; p < result.policies.size() && !result.regret.empty(); ++p)
      std::printf("%-10s mean cumulative regret at T=%lld: %.3f  [q05 %.3f, q95 %.3f]\n", result.policies[p].c_str(),
                  static_cast<long long>(result.horizon), result.regret[p].mean.back(), result.regret[p].q05.back(),
                  result.regret[p].q95.back());
    return result.failures.empty() ? 0 : kRuntimeError;
  } catch (const glb::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "runtime failure: " << e.what() << "\n";
    return kRuntimeError;
  }
}

int cmd_validate(const RunOptions& o) {
  glb::KeyValueConfig kv;
  glb::ExperimentConfig cfg;
  try {
    kv = load_with_overrides(o);
    if (!kv.has("experiment")) kv.set("experiment", "concentration");
    cfg = glb::experiment_config_from(kv);
    if (cfg.experiment != glb::ExperimentKind::concentration)
      throw glb::ConfigError("validate-concentration needs experiment = concentration");
  } catch (const glb::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  }
  try {
    const auto lines = glb::validate_concentration(cfg.concentration);
    glb::write_concentration_csv(cfg.output_dir, lines);
    glb::write_manifest(cfg.output_dir, kv, cfg);
    bool ok = true;
    for (const auto& l : lines) {
      std::printf("gamma=%-8g violations=%d/%d frequency=%.4f allowed=%.4f max_ratio=%.3f %s\n", l.gamma, l.violations,
                  l.replications, l.frequency, l.allowed, l.max_ratio, l.pass ? "PASS" : "FAIL");
      ok = ok && l.pass;
    }
    return ok ? 0 : kRuntimeError;
  } catch (const std::exception& e) {
    std::cerr << "runtime failure: " << e.what() << "\n";
    return kRuntimeError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Non-stationary generalized linear bandit experiments"};
  app.require_subcommand(1);

  RunOptions run_opts;
  auto* run = app.add_subcommand("run", "Run a regret experiment (sim2d or replay)");
  run->add_option("--config", run_opts.config, "Key-value config file")->required();
  run->add_option("--policy", run_opts.policies, "Policy to run (repeatable); overrides 'policies'");
  run->add_option("--runs", run_opts.runs, "Number of independent runs");
  run->add_option("--seed", run_opts.seed, "Base seed; run i uses seed + i");
  run->add_option("--out", run_opts.out, "Output directory");

  RunOptions val_opts;
  auto* val = app.add_subcommand("validate-concentration", "Monte-Carlo check of the self-normalized bound");
  val->add_option("--config", val_opts.config, "Key-value config file")->required();
  val->add_option("--out", val_opts.out, "Output directory");

  std::string synth_out;
  std::uint64_t synth_seed = 1;
  int synth_pos = 268, synth_neg = 500;
  double synth_sep = 1.0;
  auto* synth = app.add_subcommand("synth-replay", "Write a synthetic two-class CSV in the replay format");
  synth->add_option("--out", synth_out, "Output CSV path")->required();
  synth->add_option("--seed", synth_seed, "Generator seed");
  synth->add_option("--positives", synth_pos, "Rows with outcome 1");
  synth->add_option("--negatives", synth_neg, "Rows with outcome 0");
  synth->add_option("--separation", synth_sep, "Class mean offset per feature, in standard deviations");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  if (*run) return cmd_run(run_opts);
  if (*val) return cmd_validate(val_opts);
  if (*synth) {
    std::ofstream f(synth_out, std::ios::binary);
    if (!f) {
      std::cerr << "cannot write " << synth_out << "\n";
      return kRuntimeError;
    }
    f << glb::synthetic_replay_csv(synth_pos, synth_neg, synth_sep, synth_seed);
    return f ? 0 : kRuntimeError;
  }
  return kConfigError;
}
