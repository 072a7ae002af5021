#pragma once

// Experiment runner: builds policies and environments from a flat config,
// executes seeded runs (optionally in parallel), aggregates cumulative
// regret across runs and writes the CSV outputs plus a manifest.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "glbandit/baselines.hpp"
#include "glbandit/concentration.hpp"
#include "glbandit/config.hpp"
#include "glbandit/environments.hpp"
#include "glbandit/policies.hpp"
#include "glbandit/replay.hpp"

namespace glb {

inline constexpr const char* kVersion = "0.3.1";

enum class ExperimentKind { sim2d, replay, concentration };
enum class Tuning { paper_known_gamma_t, paper_unknown_gamma_t, manual };
/// theoretical: confidence radii as derived. calibrated: every radius is
/// rescaled so that the round-1 bonus of an action of norm L equals m.
enum class RadiusMode { theoretical, calibrated };

inline const std::vector<std::string>& known_policies() {
  static const std::vector<std::string> names = {"sw_glucb", "d_glucb", "glucb", "linucb", "sw_linucb", "d_linucb"};
  return names;
}

/// Per-policy settings that override the experiment-wide ones.
struct PolicyOverrides {
  std::optional<std::int64_t> tau;
  std::optional<double> gamma;
  std::optional<double> D_gamma;
  std::optional<double> delta;
  std::optional<double> lambda;
  std::optional<double> exploration_scale;
};

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::sim2d;
  std::vector<std::string> policies = known_policies();
  std::map<std::string, PolicyOverrides> overrides;
  int runs = 100;
  std::uint64_t base_seed = 1;
  std::int64_t horizon = 6000;
  double delta = 0.05;
  double lambda = 1.0;
  double exploration_scale = 1.0;
  RadiusMode radius = RadiusMode::theoretical;
  Tuning tuning = Tuning::paper_known_gamma_t;
  std::optional<std::int64_t> tau;
  std::optional<double> gamma;
  int K = 6;
  std::int64_t snapshot_interval = 1000;
  std::vector<std::int64_t> snapshot_rounds;
  int threads = 0;
  std::string output_dir = "results";

  // replay
  std::string replay_csv;
  std::int64_t invert_at = 1000;
  double replay_S = 5.0;
  double replay_L = 0.0;  // 0: max standardized arm norm
  int synthetic_positives = 268;
  int synthetic_negatives = 500;
  double synthetic_separation = 1.0;

  // concentration
  SelfNormalizedConfig concentration;

  void validate() const {
    if (runs < 1) throw ConfigError("runs must be >= 1");
    if (horizon < 1) throw ConfigError("horizon must be >= 1");
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
    if (!(lambda > 0.0)) throw ConfigError("lambda must be positive");
    if (!(exploration_scale >= 0.0)) throw ConfigError("exploration_scale must be non-negative");
    if (K < 1) throw ConfigError("K must be >= 1");
    if (snapshot_interval < 0) throw ConfigError("snapshot_interval must be >= 0");
    if (policies.empty() && experiment != ExperimentKind::concentration) throw ConfigError("no policies selected");
    for (const auto& p : policies)
      if (std::find(known_policies().begin(), known_policies().end(), p) == known_policies().end())
        throw ConfigError("unknown policy '" + p + "'");
    if (tuning == Tuning::manual) {
      const bool need_tau = std::any_of(policies.begin(), policies.end(),
                                        [&](const std::string& p) { return p.rfind("sw_", 0) == 0 && !overrides_tau(p); });
      const bool need_gamma = std::any_of(policies.begin(), policies.end(),
                                          [&](const std::string& p) { return p.rfind("d_", 0) == 0 && !overrides_gamma(p); });
      if (need_tau && !tau) throw ConfigError("tuning = manual requires tau");
      if (need_gamma && !gamma) throw ConfigError("tuning = manual requires gamma");
    }
    if (tau && *tau < 1) throw ConfigError("tau must be >= 1");
    if (gamma && !(*gamma > 0.0 && *gamma < 1.0)) throw ConfigError("gamma must lie in (0, 1)");
    if (experiment == ExperimentKind::sim2d && horizon > 6000)
      throw ConfigError("sim2d horizon cannot exceed the 6000-round schedule");
    if (experiment == ExperimentKind::replay && invert_at < 0) throw ConfigError("invert_at must be >= 0");
    if (experiment == ExperimentKind::concentration) {
      try {
        concentration.validate();
      } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
      }
    }
  }

 private:
  bool overrides_tau(const std::string& p) const {
    auto it = overrides.find(p);
    return it != overrides.end() && it->second.tau.has_value();
  }
  bool overrides_gamma(const std::string& p) const {
    auto it = overrides.find(p);
    return it != overrides.end() && it->second.gamma.has_value();
  }
};

/// Build an ExperimentConfig from key/value pairs; unknown keys are errors.
inline ExperimentConfig experiment_config_from(const KeyValueConfig& kv) {
  ExperimentConfig c;
  const std::string exp = kv.get_string("experiment", "sim2d");
  if (exp == "sim2d") {
    c.experiment = ExperimentKind::sim2d;
  } else if (exp == "replay") {
    c.experiment = ExperimentKind::replay;
    c.horizon = 2000;
  } else if (exp == "concentration") {
    c.experiment = ExperimentKind::concentration;
  } else {
    throw ConfigError("unknown experiment '" + exp + "'");
  }
  c.policies = kv.get_list("policies", c.policies);
  c.runs = static_cast<int>(kv.get_int("runs", c.runs));
  c.base_seed = static_cast<std::uint64_t>(kv.get_int("base_seed", static_cast<std::int64_t>(c.base_seed)));
  c.horizon = kv.get_int("horizon", c.horizon);
  c.delta = kv.get_double("delta", c.delta);
  c.lambda = kv.get_double("lambda", c.lambda);
  c.exploration_scale = kv.get_double("exploration_scale", c.exploration_scale);
  const std::string radius = kv.get_string("radius", "theoretical");
  if (radius == "theoretical")
    c.radius = RadiusMode::theoretical;
  else if (radius == "calibrated")
    c.radius = RadiusMode::calibrated;
  else
    throw ConfigError("unknown radius mode '" + radius + "'");
  const std::string tuning = kv.get_string("tuning", "paper_known_gamma_t");
  if (tuning == "paper_known_gamma_t")
    c.tuning = Tuning::paper_known_gamma_t;
  else if (tuning == "paper_unknown_gamma_t")
    c.tuning = Tuning::paper_unknown_gamma_t;
  else if (tuning == "manual")
    c.tuning = Tuning::manual;
  else
    throw ConfigError("unknown tuning '" + tuning + "'");
  if (kv.has("tau")) c.tau = kv.get_int("tau", 0);
  if (kv.has("gamma")) c.gamma = kv.get_double("gamma", 0.0);
  c.K = static_cast<int>(kv.get_int("K", c.K));
  c.snapshot_interval = kv.get_int("snapshot_interval", c.snapshot_interval);
  for (double r : kv.get_double_list("snapshot_rounds", {})) c.snapshot_rounds.push_back(static_cast<std::int64_t>(r));
  c.threads = static_cast<int>(kv.get_int("threads", c.threads));
  c.output_dir = kv.get_string("output_dir", c.output_dir);

  c.replay_csv = kv.get_string("replay_csv", c.replay_csv);
  c.invert_at = kv.get_int("invert_at", c.invert_at);
  c.replay_S = kv.get_double("replay_S", c.replay_S);
  c.replay_L = kv.get_double("replay_L", c.replay_L);
  c.synthetic_positives = static_cast<int>(kv.get_int("synthetic_positives", c.synthetic_positives));
  c.synthetic_negatives = static_cast<int>(kv.get_int("synthetic_negatives", c.synthetic_negatives));
  c.synthetic_separation = kv.get_double("synthetic_separation", c.synthetic_separation);

  auto& cc = c.concentration;
  cc.delta = c.delta;
  cc.lambda = c.lambda;
  cc.seed = c.base_seed;
  cc.replications = static_cast<int>(kv.get_int("replications", cc.replications));
  cc.gammas = kv.get_double_list("gammas", cc.gammas);
  cc.d = static_cast<int>(kv.get_int("dimension", cc.d));
  cc.sigma = kv.get_double("sigma", cc.sigma);
  cc.c_mu = kv.get_double("c_mu", cc.c_mu);
  cc.L = kv.get_double("L", cc.L);
  if (c.experiment == ExperimentKind::concentration) cc.horizon = c.horizon;
  const std::string noise = kv.get_string("noise", "gaussian");
  if (noise == "gaussian")
    cc.noise = NoiseKind::gaussian;
  else if (noise == "zero")
    cc.noise = NoiseKind::zero;
  else
    throw ConfigError("unknown noise '" + noise + "'");

  for (const auto& name : known_policies()) {
    PolicyOverrides o;
    if (kv.has(name + ".tau")) o.tau = kv.get_int(name + ".tau", 0);
    if (kv.has(name + ".gamma")) o.gamma = kv.get_double(name + ".gamma", 0.0);
    if (kv.has(name + ".D_gamma")) o.D_gamma = kv.get_double(name + ".D_gamma", 0.0);
    if (kv.has(name + ".delta")) o.delta = kv.get_double(name + ".delta", 0.0);
    if (kv.has(name + ".lambda")) o.lambda = kv.get_double(name + ".lambda", 0.0);
    if (kv.has(name + ".exploration_scale")) o.exploration_scale = kv.get_double(name + ".exploration_scale", 0.0);
    c.overrides[name] = o;
  }
  if (const auto unused = kv.unused_keys(); !unused.empty()) throw ConfigError("unknown config key '" + unused.front() + "'");
  c.validate();
  return c;
}

/// Canonical text of the effective configuration (sorted keys).
inline std::string canonical_config(const KeyValueConfig& kv) {
  std::string out;
  for (const auto& [k, v] : kv.values()) out += k + "=" + v + "\n";
  return out;
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Everything a policy needs to know about the world it plays in.
struct WorldSpec {
  int d = 2;
  double L = 1.0;
  double S = 1.0;
  double m = 1.0;
  std::optional<std::int64_t> breakpoints;
  LinkFunction link = LinkFunction::logistic();
};

inline std::unique_ptr<Policy> make_policy(const std::string& name, const ExperimentConfig& cfg, const WorldSpec& world) {
  const PolicyOverrides o = cfg.overrides.count(name) ? cfg.overrides.at(name) : PolicyOverrides{};
  PolicyConfig pc;
  pc.delta = o.delta.value_or(cfg.delta);
  pc.lambda = o.lambda.value_or(cfg.lambda);
  pc.exploration_scale = o.exploration_scale.value_or(cfg.exploration_scale);
  pc.L = world.L;
  pc.S = world.S;
  pc.m = world.m;
  pc.d = world.d;
  pc.horizon = cfg.horizon;
  pc.link = world.link;

  const std::optional<std::int64_t> gamma_t =
      cfg.tuning == Tuning::paper_known_gamma_t ? world.breakpoints.value_or(1) : std::optional<std::int64_t>{};
  auto window = [&]() -> std::size_t {
    if (o.tau) return static_cast<std::size_t>(*o.tau);
    if (cfg.tuning == Tuning::manual) return static_cast<std::size_t>(*cfg.tau);
    return tune_tau(world.d, cfg.horizon, gamma_t);
  };
  auto discount = [&]() -> Discount {
    if (o.gamma || cfg.tuning == Tuning::manual) {
      const double g = o.gamma.value_or(cfg.gamma.value_or(0.0));
      const double D = o.D_gamma.value_or(discount_horizon(g));
      return Discount{g, D};
    }
    const DiscountTuning t = tune_gamma(world.d, cfg.horizon, gamma_t);
    return Discount{t.gamma, o.D_gamma.value_or(t.D_gamma)};
  };

  // Round-1 bonus of a norm-L action: the metric is then (lambda/c_mu) I for
  // the GLM policies and lambda I for the linear ones.
  auto calibrate = [&](bool glm) {
    if (cfg.radius != RadiusMode::calibrated) return;
    const GlmConstants k = pc.constants();
    double bonus = 0.0;
    if (glm) {
      const double rho = std::holds_alternative<Discount>(pc.forgetting) ? rho_d(1, pc, k) : rho_sw(1, pc, k);
      bonus = rho * pc.L * std::sqrt(k.c_mu / pc.lambda);
    } else {
      bonus = linear_radius(1.0, pc) * pc.L / std::sqrt(pc.lambda);
    }
    pc.exploration_scale *= pc.m / bonus;
  };

  if (name == "glucb" || name == "linucb") pc.forgetting = SlidingWindow{SlidingWindowState::unbounded};
  if (name == "sw_glucb" || name == "sw_linucb") pc.forgetting = SlidingWindow{window()};
  if (name == "d_glucb" || name == "d_linucb") pc.forgetting = discount();
  calibrate(name.find("linucb") == std::string::npos);

  if (name == "sw_glucb") {
    return std::make_unique<SlidingWindowGlucb>(pc, name);
  }
  if (name == "d_glucb") {
    return std::make_unique<DiscountedGlucb>(pc, name);
  }
  if (name == "glucb") return make_stationary_glucb(pc, name);
  if (name == "sw_linucb") {
    return std::make_unique<SlidingWindowLinUcb>(pc, name);
  }
  if (name == "d_linucb") {
    return std::make_unique<DiscountedLinUcb>(pc, name);
  }
  if (name == "linucb") return make_linucb(pc, name);
  throw ConfigError("unknown policy '" + name + "'");
}

/// One policy's trajectory within one run.
struct PolicyTrace {
  std::vector<double> reward;
  std::vector<double> regret;
  std::vector<double> cumulative_regret;
  /// Parallel arrays: round, theta_hat at that round, theta* at that round.
  std::vector<std::int64_t> snapshot_round;
  std::vector<Vector> snapshot_theta;
  std::vector<Vector> snapshot_truth;
};

struct RunRecord {
  int run = 0;
  std::uint64_t seed = 0;
  std::vector<PolicyTrace> traces;  // indexed like ExperimentConfig::policies
};

struct RunFailure {
  int run;
  std::uint64_t seed;
  std::string policy;
  std::string message;
};

struct QuantileBand {
  std::vector<double> mean;
  std::vector<double> q05;
  std::vector<double> q95;
};

struct AggregateResult {
  std::vector<std::string> policies;
  std::int64_t horizon = 0;
  std::vector<RunRecord> runs;  // successful runs, ordered by run index
  std::vector<RunFailure> failures;
  std::vector<QuantileBand> regret;     // per policy, cumulative regret
  std::vector<QuantileBand> detection;  // per policy, running fraction of reward-1 picks (replay)
  bool is_replay = false;
};

/// Empirical quantile with linear interpolation at rank q (n - 1); sorts `v`.
inline double quantile(std::vector<double>& v, double q) {
  if (v.empty()) throw InvalidArgument("quantile: empty sample");
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

/// Mean and 5%/95% quantiles per round of a per-run series.
template <typename Extract>
QuantileBand aggregate_band(const std::vector<RunRecord>& runs, std::size_t policy, std::int64_t horizon,
                            Extract&& series) {
  QuantileBand band;
  band.mean.resize(horizon);
  band.q05.resize(horizon);
  band.q95.resize(horizon);
  std::vector<double> column(runs.size());
  for (std::int64_t t = 0; t < horizon; ++t) {
    double sum = 0.0;
    for (std::size_t r = 0; r < runs.size(); ++r) {
      column[r] = series(runs[r].traces[policy])[t];
      sum += column[r];
    }
    band.mean[t] = sum / static_cast<double>(runs.size());
    band.q05[t] = quantile(column, 0.05);
    band.q95[t] = quantile(column, 0.95);
  }
  return band;
}

namespace detail {

inline bool is_snapshot_round(const ExperimentConfig& cfg, std::int64_t t) {
  if (cfg.snapshot_interval > 0 && t % cfg.snapshot_interval == 0) return true;
  return std::find(cfg.snapshot_rounds.begin(), cfg.snapshot_rounds.end(), t) != cfg.snapshot_rounds.end();
}

inline void record_round(PolicyTrace& tr, double reward, double regret) {
  tr.reward.push_back(reward);
  tr.regret.push_back(regret);
  tr.cumulative_regret.push_back((tr.cumulative_regret.empty() ? 0.0 : tr.cumulative_regret.back()) + regret);
}

inline PolicyTrace run_sim2d_policy(Policy& policy, const ExperimentConfig& cfg, const WorldSpec& world,
                                    std::uint64_t seed) {
  PiecewiseParameterSchedule full = abrupt_schedule_2d();
  std::vector<PiecewiseParameterSchedule::Segment> segs;
  for (const auto& s : full.segments())
    if (s.start <= cfg.horizon) segs.push_back(s);
  SimulatedEnvironment env(PiecewiseParameterSchedule(std::move(segs), cfg.horizon), cfg.K, world.link, seed, world.L,
                           world.m);
  PolicyTrace tr;
  tr.reward.reserve(cfg.horizon);
  tr.regret.reserve(cfg.horizon);
  tr.cumulative_regret.reserve(cfg.horizon);
  for (std::int64_t t = 1; t <= cfg.horizon; ++t) {
    const SimulatedRound& round = env.next_round();
    const UcbDecision dec = policy.decide(round.action_set);
    if (is_snapshot_round(cfg, t)) {
      tr.snapshot_round.push_back(t);
      tr.snapshot_theta.push_back(policy.theta_hat());
      tr.snapshot_truth.push_back(env.theta_star());
    }
    const double x = env.reward(dec.chosen_index);
    record_round(tr, x, env.regret(dec.chosen_index));
    policy.observe(round.action_set[dec.chosen_index], x);
  }
  return tr;
}

inline PolicyTrace run_replay_policy(Policy& policy, const ExperimentConfig& cfg, const ReplayDataset& ds,
                                     std::uint64_t seed) {
  Rng rng = make_rng(seed, 3);
  PolicyTrace tr;
  for (std::int64_t t = 1; t <= cfg.horizon; ++t) {
    const ReplayRound round = replay_round(ds, t, cfg.invert_at, rng);
    const UcbDecision dec = policy.decide(round.actions);
    if (is_snapshot_round(cfg, t)) {
      tr.snapshot_round.push_back(t);
      tr.snapshot_theta.push_back(policy.theta_hat());
      tr.snapshot_truth.push_back(Vector::Zero(kReplayDim));
    }
    // the other arm's outcome is always 1 - x and never shown to the policy
    const double x = dec.chosen_index == round.diabetic_index ? 1.0 : 0.0;
    record_round(tr, x, 1.0 - x);
    policy.observe(round.actions[dec.chosen_index], x);
  }
  return tr;
}

}  // namespace detail

/// Dataset used by replay experiments: the configured CSV, or a synthetic
/// stand-in generated from the experiment seed when no path is given.
inline ReplayDataset replay_dataset_for(const ExperimentConfig& cfg) {
  if (!cfg.replay_csv.empty()) return load_replay_dataset(cfg.replay_csv);
  std::istringstream in(
      synthetic_replay_csv(cfg.synthetic_positives, cfg.synthetic_negatives, cfg.synthetic_separation, cfg.base_seed));
  return parse_replay_csv(in);
}

/// Execute every (run, policy) pair; runs are distributed over threads and
/// results land in run order, so output is independent of the thread count.
inline AggregateResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.experiment == ExperimentKind::concentration)
    throw ConfigError("run_experiment: use validate_concentration for the concentration experiment");

  WorldSpec world;
  std::optional<ReplayDataset> dataset;
  if (cfg.experiment == ExperimentKind::sim2d) {
    const auto sched = abrupt_schedule_2d();
    world.d = 2;
    world.L = 1.0;
    world.S = sched.max_norm();
    std::int64_t changes = 0;
    for (auto b : sched.breakpoints()) changes += b < cfg.horizon ? 1 : 0;
    world.breakpoints = std::max<std::int64_t>(changes, 1);
  } else {
    dataset = replay_dataset_for(cfg);
    world.d = kReplayDim;
    world.L = cfg.replay_L > 0.0 ? cfg.replay_L : dataset->max_arm_norm();
    world.S = cfg.replay_S;
    world.breakpoints = 1;
  }
  // fail on bad policy settings before any run starts
  for (const auto& name : cfg.policies) make_policy(name, cfg, world);

  std::vector<std::optional<RunRecord>> slots(cfg.runs);
  std::vector<std::optional<RunFailure>> failed(cfg.runs);
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (int r = next++; r < cfg.runs; r = next++) {
      const std::uint64_t seed = cfg.base_seed + static_cast<std::uint64_t>(r);
      RunRecord rec{r, seed, {}};
      std::string current;
      try {
        for (const auto& name : cfg.policies) {
          current = name;
          auto policy = make_policy(name, cfg, world);
          rec.traces.push_back(cfg.experiment == ExperimentKind::sim2d
                                   ? detail::run_sim2d_policy(*policy, cfg, world, seed)
                                   : detail::run_replay_policy(*policy, cfg, *dataset, seed));
        }
        slots[r] = std::move(rec);
      } catch (const Error& e) {
        failed[r] = RunFailure{r, seed, current, e.what()};
      }
    }
  };
  const int threads = std::max(1, std::min(cfg.runs, cfg.threads > 0 ? cfg.threads
                                                                      : static_cast<int>(std::thread::hardware_concurrency())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
  }

  AggregateResult out;
  out.policies = cfg.policies;
  out.horizon = cfg.horizon;
  out.is_replay = cfg.experiment == ExperimentKind::replay;
  for (int r = 0; r < cfg.runs; ++r) {
    if (slots[r]) out.runs.push_back(std::move(*slots[r]));
    if (failed[r]) out.failures.push_back(std::move(*failed[r]));
  }
  if (out.runs.empty()) return out;
  for (std::size_t p = 0; p < cfg.policies.size(); ++p) {
    out.regret.push_back(
        aggregate_band(out.runs, p, cfg.horizon, [](const PolicyTrace& tr) -> const std::vector<double>& { return tr.cumulative_regret; }));
    if (out.is_replay) {
      std::vector<std::vector<double>> running(out.runs.size());
      for (std::size_t r = 0; r < out.runs.size(); ++r) {
        const auto& rw = out.runs[r].traces[p].reward;
        running[r].resize(rw.size());
        double s = 0.0;
        for (std::size_t t = 0; t < rw.size(); ++t) running[r][t] = (s += rw[t]) / static_cast<double>(t + 1);
      }
      QuantileBand band;
      std::vector<double> column(running.size());
      for (std::int64_t t = 0; t < cfg.horizon; ++t) {
        double sum = 0.0;
        for (std::size_t r = 0; r < running.size(); ++r) sum += (column[r] = running[r][t]);
        band.mean.push_back(sum / static_cast<double>(running.size()));
        band.q05.push_back(quantile(column, 0.05));
        band.q95.push_back(quantile(column, 0.95));
      }
      out.detection.push_back(std::move(band));
    }
  }
  return out;
}

namespace detail {

/// Shortest text with 17 significant digits.
inline void put_double(std::string& out, double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  out.append(buf, res.ptr);
}

inline void write_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write " + path.string());
  f.write(body.data(), static_cast<std::streamsize>(body.size()));
  if (!f) throw IoError("write failed for " + path.string());
}

inline std::string band_csv(const std::vector<std::string>& policies, const std::vector<QuantileBand>& bands,
                            std::int64_t horizon) {
  std::string s = "round,policy,mean,q05,q95\n";
  for (std::size_t p = 0; p < bands.size(); ++p) {
    for (std::int64_t t = 0; t < horizon; ++t) {
      s += std::to_string(t + 1);
      s += ',';
      s += policies[p];
      s += ',';
      put_double(s, bands[p].mean[t]);
      s += ',';
      put_double(s, bands[p].q05[t]);
      s += ',';
      put_double(s, bands[p].q95[t]);
      s += '\n';
    }
  }
  return s;
}

}  // namespace detail

/// Writes regret_mean_quantiles.csv, theta_snapshots.csv, regret.csv and,
/// for replay experiments, detection_proportion.csv.
inline std::vector<std::filesystem::path> emit_csv(const AggregateResult& result, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> written;

  auto put = [&](const char* name, const std::string& body) {
    detail::write_file(dir / name, body);
    written.push_back(dir / name);
  };

  put("regret_mean_quantiles.csv", detail::band_csv(result.policies, result.regret, result.horizon));

  std::string snap = "run,round,policy,component_index,value\n";
  for (const auto& run : result.runs)
    for (std::size_t p = 0; p < run.traces.size(); ++p) {
      const auto& tr = run.traces[p];
      for (std::size_t i = 0; i < tr.snapshot_round.size(); ++i)
        for (Eigen::Index c = 0; c < tr.snapshot_theta[i].size(); ++c) {
          snap += std::to_string(run.run) + ',' + std::to_string(tr.snapshot_round[i]) + ',' + result.policies[p] + ',' +
                  std::to_string(c) + ',';
          detail::put_double(snap, tr.snapshot_theta[i][c]);
          snap += '\n';
        }
    }
  put("theta_snapshots.csv", snap);

  std::string reg = "run,round,policy,reward,regret,cumulative_regret\n";
  for (const auto& run : result.runs)
    for (std::size_t p = 0; p < run.traces.size(); ++p) {
      const auto& tr = run.traces[p];
      for (std::size_t t = 0; t < tr.regret.size(); ++t) {
        reg += std::to_string(run.run);
        reg += ',';
        reg += std::to_string(t + 1);
        reg += ',';
        reg += result.policies[p];
        reg += ',';
        detail::put_double(reg, tr.reward[t]);
        reg += ',';
        detail::put_double(reg, tr.regret[t]);
        reg += ',';
        detail::put_double(reg, tr.cumulative_regret[t]);
        reg += '\n';
      }
    }
  put("regret.csv", reg);

  if (result.is_replay) put("detection_proportion.csv", detail::band_csv(result.policies, result.detection, result.horizon));
  return written;
}

/// manifest.txt: version, config hash, seed and the effective configuration.
inline void write_manifest(const std::filesystem::path& dir, const KeyValueConfig& kv, const ExperimentConfig& cfg,
                           const AggregateResult* result = nullptr) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const std::string canon = canonical_config(kv);
  std::ostringstream m;
  m << "software_version=" << kVersion << "\n";
  m << "config_hash=" << std::hex << fnv1a(canon) << std::dec << "\n";
  m << "base_seed=" << cfg.base_seed << "\n";
  m << "runs=" << cfg.runs << "\n";
  if (result) {
    m << "successful_runs=" << result->runs.size() << "\n";
    for (const auto& f : result->failures)
      m << "failed_run=" << f.run << " seed=" << f.seed << " policy=" << f.policy << " error=" << f.message << "\n";
  }
  m << "[config]\n" << canon;
  detail::write_file(dir / "manifest.txt", m.str());
}

/// concentration.csv with one line per discount factor.
inline void write_concentration_csv(const std::filesystem::path& dir, const std::vector<CoverageLine>& lines) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  std::string s = "gamma,replications,violations,frequency,allowed,max_ratio,pass\n";
  for (const auto& l : lines) {
    detail::put_double(s, l.gamma);
    s += ',' + std::to_string(l.replications) + ',' + std::to_string(l.violations) + ',';
    detail::put_double(s, l.frequency);
    s += ',';
    detail::put_double(s, l.allowed);
    s += ',';
    detail::put_double(s, l.max_ratio);
    s += l.pass ? ",1\n" : ",0\n";
  }
  detail::write_file(dir / "concentration.csv", s);
}

}  // namespace glb
