#pragma once

// Monte-Carlo checks of the high-probability bounds behind the confidence
// radii: the anytime self-normalized bound for discounted sums, and the
// per-round coverage of the SW-GLUCB / D-GLUCB confidence intervals.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <variant>
#include <vector>

#include "glbandit/environments.hpp"
#include "glbandit/estimators.hpp"
#include "glbandit/linalg.hpp"
#include "glbandit/policies.hpp"

namespace glb {

enum class NoiseKind { gaussian, zero };

struct SelfNormalizedConfig {
  double delta = 0.1;
  int replications = 1000;
  std::vector<double> gammas = {0.9, 0.99};
  int d = 2;
  double sigma = 0.5;
  NoiseKind noise = NoiseKind::gaussian;
  std::int64_t horizon = 2000;
  double lambda = 1.0;
  double c_mu = 1.0;
  double L = 1.0;
  std::uint64_t seed = 1;

  void validate() const {
    if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("concentration: delta must lie in (0, 1)");
    if (replications < 1 || d < 1 || horizon < 1) throw InvalidArgument("concentration: counts must be positive");
    if (!(sigma >= 0.0 && lambda > 0.0 && c_mu > 0.0 && L > 0.0))
      throw InvalidArgument("concentration: sigma must be >= 0; lambda, c_mu, L > 0");
    if (gammas.empty()) throw InvalidArgument("concentration: no discount factors");
    for (double g : gammas)
      if (!(g > 0.0 && g < 1.0)) throw InvalidArgument("concentration: gamma must lie in (0, 1)");
  }
};

/// sigma sqrt(2 log(1/delta) + d log(1 + c L^2 (1 - gamma^{2t}) / (d lambda (1 - gamma^2)))).
inline double self_normalized_threshold(std::int64_t t, double gamma, const SelfNormalizedConfig& cfg) {
  const double d = cfg.d;
  return cfg.sigma * std::sqrt(2.0 * std::log(1.0 / cfg.delta) +
                               d * std::log1p(cfg.c_mu * cfg.L * cfg.L * detail::discounted_count(gamma, static_cast<double>(t)) /
                                              (d * cfg.lambda)));
}

struct CoverageLine {
  double gamma = 0.0;
  int replications = 0;
  int violations = 0;
  double frequency = 0.0;
  /// delta + 2 sqrt(delta / R)
  double allowed = 0.0;
  /// Largest ratio ||S_t|| / threshold seen over all replications and rounds.
  double max_ratio = 0.0;
  bool pass = false;
};

/// Replicates the discounted martingale S_t = sum gamma^{-s} A_s eta_s with
/// actions uniform in the L-ball and counts replications in which
/// ||S_t||_{V~_t^{-1}} exceeds the threshold at some t <= horizon.
///
/// Computed in the rescaled form ||sum gamma^{t-s} A_s eta_s||_{W~_t^{-1}},
/// which is the same quantity (multiply S_t by gamma^t, V~_t by gamma^{2t}).
inline std::vector<CoverageLine> validate_concentration(const SelfNormalizedConfig& cfg) {
  cfg.validate();
  std::vector<CoverageLine> out;
  const double reg = cfg.lambda / cfg.c_mu;
  const Matrix I = Matrix::Identity(cfg.d, cfg.d);
  for (std::size_t gi = 0; gi < cfg.gammas.size(); ++gi) {
    const double gamma = cfg.gammas[gi];
    const double g2 = gamma * gamma;
    CoverageLine line;
    line.gamma = gamma;
    line.replications = cfg.replications;
    for (int r = 0; r < cfg.replications; ++r) {
      Rng rng = make_rng(cfg.seed + static_cast<std::uint64_t>(r), 100 + static_cast<std::uint32_t>(gi));
      std::normal_distribution<double> normal(0.0, cfg.sigma > 0.0 ? cfg.sigma : 1.0);
      Vector sum = Vector::Zero(cfg.d);
      Matrix W_tilde = reg * I;
      bool violated = false;
      for (std::int64_t t = 1; t <= cfg.horizon && !violated; ++t) {
        const Vector a = sample_unit_ball(cfg.d, rng, cfg.L);
        const double eta = cfg.noise == NoiseKind::gaussian ? normal(rng) : 0.0;
        sum = gamma * sum + eta * a;
        W_tilde = a * a.transpose() + g2 * W_tilde + reg * (1.0 - g2) * I;
        const double stat = SpdFactor(W_tilde).inverse_norm(sum);
        const double threshold = self_normalized_threshold(t, gamma, cfg);
        if (threshold > 0.0) line.max_ratio = std::max(line.max_ratio, stat / threshold);
        violated = stat > threshold;
      }
      line.violations += violated ? 1 : 0;
    }
    line.frequency = static_cast<double>(line.violations) / cfg.replications;
    line.allowed = cfg.delta + 2.0 * std::sqrt(cfg.delta / cfg.replications);
    line.pass = line.frequency <= line.allowed;
    out.push_back(line);
  }
  return out;
}

struct IntervalCoverageConfig {
  PolicyConfig policy;  // forgetting selects SW (window) or D (discount)
  Vector theta_star;
  int K = 6;
  int replications = 1000;
  std::uint64_t seed = 1;
};

struct IntervalCoverage {
  int replications = 0;
  int failures = 0;
  double failure_fraction = 0.0;
  /// delta + 2 sqrt(delta (1 - delta) / R)
  double allowed = 0.0;
  double max_ratio = 0.0;
  bool pass = false;
};

/// Stationary logistic world, non-adaptive (uniformly random) action choice.
/// A replication fails if for some round t <= horizon and some offered action
/// a, |mu(a^T theta*) - mu(a^T theta~_t)| > rho_t ||a||_{M_{t-1}^{-1}}.
inline IntervalCoverage interval_coverage(const IntervalCoverageConfig& cfg) {
  const PolicyConfig& pc = cfg.policy;
  pc.validate();
  const GlmConstants k = pc.constants();
  if (cfg.theta_star.size() != pc.d || cfg.theta_star.norm() > k.S * (1.0 + 1e-12))
    throw InvalidArgument("interval_coverage: theta* must be a d-vector with norm <= S");
  const bool windowed = std::holds_alternative<SlidingWindow>(pc.forgetting);
  const PiecewiseParameterSchedule schedule({{1, cfg.theta_star}}, pc.horizon);

  IntervalCoverage out;
  out.replications = cfg.replications;
  for (int r = 0; r < cfg.replications; ++r) {
    SimulatedEnvironment env(schedule, cfg.K, pc.link, cfg.seed + static_cast<std::uint64_t>(r), k.L, k.m);
    Rng choice_rng = make_rng(cfg.seed + static_cast<std::uint64_t>(r), 2);
    std::optional<SlidingWindowState> sw;
    std::optional<DiscountedState> disc;
    if (windowed)
      sw.emplace(pc.d, std::get<SlidingWindow>(pc.forgetting).tau, pc.lambda / k.c_mu, k.L, k.m);
    else
      disc.emplace(pc.d, std::get<Discount>(pc.forgetting).gamma, pc.lambda / k.c_mu, k.L, k.m);

    Vector warm = Vector::Zero(pc.d);
    bool failed = false;
    for (std::int64_t t = 1; t <= pc.horizon && !failed; ++t) {
      const SimulatedRound& round = env.next_round();
      const SampleView view = windowed ? sw->view() : disc->view();
      const Matrix& proj_metric = windowed ? sw->V() : disc->W_tilde();
      const Matrix& bonus_metric = windowed ? sw->V() : disc->W();
      const MleSolution sol = estimate(view, pc.link, pc.lambda, k.S, proj_metric, warm);
      warm = sol.theta_hat;
      const double rho = windowed ? rho_sw(t, pc, k) : rho_d(t, pc, k);
      const SpdFactor M(bonus_metric);
      for (const Vector& a : round.action_set) {
        const double gap = std::abs(pc.link(a.dot(cfg.theta_star)) - pc.link(a.dot(sol.theta_tilde)));
        const double width = rho * M.inverse_norm(a);
        out.max_ratio = std::max(out.max_ratio, gap / width);
        if (gap > width) failed = true;
      }
      const auto idx = static_cast<std::size_t>(uniform01(choice_rng) * static_cast<double>(round.action_set.size()));
      const double x = env.reward(idx);
      if (windowed)
        sw->update(round.action_set[idx], x);
      else
        disc->update(round.action_set[idx], x);
    }
    out.failures += failed ? 1 : 0;
  }
  const double delta = pc.delta;
  out.failure_fraction = static_cast<double>(out.failures) / cfg.replications;
  out.allowed = delta + 2.0 * std::sqrt(delta * (1.0 - delta) / cfg.replications);
  out.pass = out.failure_fraction <= out.allowed;
  return out;
}

}  // namespace glb
