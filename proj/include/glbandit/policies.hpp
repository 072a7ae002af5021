#pragma once

// UCB decision rules for generalized linear bandits with forgetting
// (sliding window and discounting), their confidence radii, tuning of the
// window / discount, and the stationary baseline.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "glbandit/errors.hpp"
#include "glbandit/estimators.hpp"
#include "glbandit/link.hpp"
#include "glbandit/linalg.hpp"

namespace glb {

struct SlidingWindow {
  std::size_t tau = SlidingWindowState::unbounded;
};

struct Discount {
  double gamma = 0.99;
  /// Analysis horizon D(gamma); +inf removes the bias addend of rho^D.
  double D_gamma = std::numeric_limits<double>::infinity();
};

using Forgetting = std::variant<SlidingWindow, Discount>;

struct PolicyConfig {
  double delta = 0.05;
  double lambda = 1.0;
  double L = 1.0;
  double S = 1.0;
  double m = 1.0;
  int d = 2;
  std::int64_t horizon = 1;
  Forgetting forgetting = SlidingWindow{};
  LinkFunction link = LinkFunction::logistic();
  /// Multiplier applied to rho when forming the exploration bonus; 1 is the
  /// radius as derived.
  double exploration_scale = 1.0;

  void validate() const {
    if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("PolicyConfig: delta must lie in (0, 1)");
    if (!(lambda > 0.0 && L > 0.0 && S > 0.0 && m > 0.0))
      throw InvalidArgument("PolicyConfig: lambda, L, S, m must be positive");
    if (d < 1 || horizon < 1) throw InvalidArgument("PolicyConfig: d and horizon must be positive");
    if (!(exploration_scale >= 0.0)) throw InvalidArgument("PolicyConfig: exploration_scale must be non-negative");
    if (const auto* w = std::get_if<SlidingWindow>(&forgetting); w && w->tau < 1)
      throw InvalidArgument("PolicyConfig: tau must be positive");
    if (const auto* g = std::get_if<Discount>(&forgetting)) {
      if (!(g->gamma > 0.0 && g->gamma < 1.0)) throw InvalidArgument("PolicyConfig: gamma must lie in (0, 1)");
      if (!(g->D_gamma > 0.0)) throw InvalidArgument("PolicyConfig: D_gamma must be positive");
    }
  }

  GlmConstants constants() const { return GlmConstants::make(link, L, S, m); }
};

namespace detail {

/// 1 - gamma^{2t} without cancellation for gamma close to 1.
inline double one_minus_pow(double gamma, double exponent) { return -std::expm1(exponent * std::log(gamma)); }

/// (1 - gamma^{2t}) / (1 - gamma^2): effective number of squared-weight samples.
inline double discounted_count(double gamma, double t) {
  return one_minus_pow(gamma, 2.0 * t) / one_minus_pow(gamma, 2.0);
}

}  // namespace detail

/// Sliding-window confidence radius
///   rho = (2 k/c) (m/2 sqrt(2 log(T/delta) + d log(1 + c L^2 min(t,tau) / (d lambda))) + sqrt(c lambda) S).
/// An unbounded window gives the stationary radius with min(t, tau) = t.
inline double rho_sw(std::int64_t t, const PolicyConfig& cfg, const GlmConstants& k) {
  const auto* w = std::get_if<SlidingWindow>(&cfg.forgetting);
  if (!w) throw InvalidArgument("rho_sw: configuration has no sliding window");
  if (t < 1) throw InvalidArgument("rho_sw: t must be >= 1");
  const double d = cfg.d;
  const double n = static_cast<double>(std::min<std::uint64_t>(static_cast<std::uint64_t>(t), w->tau));
  const double T = static_cast<double>(cfg.horizon);
  const double c_t =
      cfg.m / 2.0 *
      std::sqrt(2.0 * std::log(T / cfg.delta) + d * std::log1p(k.c_mu * k.L * k.L * n / (d * cfg.lambda)));
  return 2.0 * k.k_mu / k.c_mu * (c_t + std::sqrt(k.c_mu * cfg.lambda) * k.S);
}

/// Discounted confidence radius, including the bias addend
/// 2 L^2 S k sqrt(c/lambda) gamma^{D(gamma)} / (1 - gamma).
inline double rho_d(std::int64_t t, const PolicyConfig& cfg, const GlmConstants& k) {
  const auto* disc = std::get_if<Discount>(&cfg.forgetting);
  if (!disc) throw InvalidArgument("rho_d: configuration has no discount");
  if (t < 1) throw InvalidArgument("rho_d: t must be >= 1");
  const double d = cfg.d;
  const double gamma = disc->gamma;
  const double c_t = cfg.m / 2.0 *
                     std::sqrt(2.0 * std::log(1.0 / cfg.delta) +
                               d * std::log1p(k.c_mu * k.L * k.L * detail::discounted_count(gamma, static_cast<double>(t)) /
                                              (d * cfg.lambda)));
  const double decay = std::isinf(disc->D_gamma) ? 0.0 : std::pow(gamma, disc->D_gamma);
  const double bias = 2.0 * k.L * k.L * k.S * k.k_mu * std::sqrt(k.c_mu / cfg.lambda) * decay /
                      detail::one_minus_pow(gamma, 1.0);
  return 2.0 * k.k_mu / k.c_mu * (c_t + std::sqrt(k.c_mu * cfg.lambda) * k.S + bias);
}

struct UcbDecision {
  std::size_t chosen_index = 0;
  std::vector<double> ucb_values;
  std::vector<double> exploration_bonus;
  Vector theta_used;
};

/// Argmax of mean(a) + bonus(a); ties go to the lowest index.
template <typename MeanFn, typename BonusFn>
UcbDecision select_by_ucb(std::span<const Vector> actions, const Vector& theta, MeanFn&& mean, BonusFn&& bonus) {
  if (actions.empty()) throw EmptyActionSet("select_action: empty action set");
  UcbDecision out;
  out.theta_used = theta;
  out.ucb_values.reserve(actions.size());
  out.exploration_bonus.reserve(actions.size());
  for (std::size_t i = 0; i < actions.size(); ++i) {
    const double b = bonus(actions[i]);
    const double u = mean(actions[i]) + b;
    out.exploration_bonus.push_back(b);
    out.ucb_values.push_back(u);
    if (u > out.ucb_values[out.chosen_index]) out.chosen_index = i;
  }
  return out;
}

/// argmax_a mu(a^T theta) + rho ||a||_{M^{-1}}.
inline UcbDecision select_action(std::span<const Vector> actions, const Vector& theta, double rho,
                                 const SpdFactor& M, const LinkFunction& link) {
  return select_by_ucb(
      actions, theta, [&](const Vector& a) { return link(a.dot(theta)); },
      [&](const Vector& a) { return rho * M.inverse_norm(a); });
}

inline UcbDecision select_action(std::span<const Vector> actions, const Vector& theta, double rho, const Matrix& M,
                                 const LinkFunction& link) {
  return select_action(actions, theta, rho, SpdFactor(M), link);
}

namespace detail {

/// Smallest n >= 1 with n^3 >= (num/den)^2, i.e. ceil((num/den)^{2/3}).
inline std::int64_t ceil_two_thirds(std::int64_t num, std::int64_t den) {
  using i128 = __int128;
  const i128 p2 = static_cast<i128>(num) * num;
  const i128 q2 = static_cast<i128>(den) * den;
  auto covers = [&](std::int64_t n) { return static_cast<i128>(n) * n * n * q2 >= p2; };
  const double ratio = static_cast<double>(num) / static_cast<double>(den);
  std::int64_t n = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(std::cbrt(ratio * ratio))));
  while (n > 1 && covers(n - 1)) --n;
  while (!covers(n)) ++n;
  return n;
}

}  // namespace detail

/// Window length ceil((dT/Gamma_T)^{2/3}), or ceil((dT)^{2/3}) when the
/// number of breakpoints is unknown; clamped to [1, T].
inline std::size_t tune_tau(int d, std::int64_t T, std::optional<std::int64_t> breakpoints) {
  if (d < 1 || T < 1) throw InvalidArgument("tune_tau: d and T must be positive");
  if (breakpoints && *breakpoints < 1) throw InvalidArgument("tune_tau: Gamma_T must be >= 1");
  const std::int64_t tau = detail::ceil_two_thirds(static_cast<std::int64_t>(d) * T, breakpoints.value_or(1));
  return static_cast<std::size_t>(std::clamp<std::int64_t>(tau, 1, T));
}

/// D(gamma) = log(1/(1-gamma)) / (1-gamma).
inline double discount_horizon(double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw InvalidArgument("discount_horizon: gamma must lie in (0, 1)");
  const double omg = 1.0 - gamma;
  return -std::log(omg) / omg;
}

struct DiscountTuning {
  double gamma;
  double D_gamma;
  double one_minus_gamma;
};

/// gamma = 1 - (Gamma_T/(dT))^{2/3} (or (1/(dT))^{2/3} when unknown) and
/// D(gamma) = log(1/(1-gamma)) / (1-gamma).
inline DiscountTuning tune_gamma(int d, std::int64_t T, std::optional<std::int64_t> breakpoints) {
  if (d < 1 || T < 1) throw InvalidArgument("tune_gamma: d and T must be positive");
  if (breakpoints && *breakpoints < 1) throw InvalidArgument("tune_gamma: Gamma_T must be >= 1");
  const double ratio = static_cast<double>(breakpoints.value_or(1)) / (static_cast<double>(d) * static_cast<double>(T));
  const double c = std::cbrt(ratio);
  const double omg = c * c;
  const double gamma = 1.0 - omg;
  if (!(gamma > 0.0)) throw InvalidArgument("tune_gamma: resulting gamma is not in (0, 1)");
  return DiscountTuning{gamma, -std::log(omg) / omg, omg};
}

/// A sequential decision maker over finite action sets.
class Policy {
 public:
  virtual ~Policy() = default;

  /// Choose among `actions` for the next round.
  virtual UcbDecision decide(std::span<const Vector> actions) = 0;
  /// Feed back the reward of the played action.
  virtual void observe(const Vector& action, double reward) = 0;
  /// Current (unconstrained) parameter estimate.
  virtual const Vector& theta_hat() const = 0;
  virtual const std::string& name() const = 0;
  /// Number of completed rounds.
  virtual std::int64_t rounds() const = 0;
};

/// SW-GLUCB; with an unbounded window this is the stationary GLUCB.
class SlidingWindowGlucb final : public Policy {
 public:
  explicit SlidingWindowGlucb(PolicyConfig cfg, std::string name = "sw_glucb")
      : cfg_(checked(std::move(cfg))), k_(cfg_.constants()), name_(std::move(name)),
        state_(cfg_.d, std::get<SlidingWindow>(cfg_.forgetting).tau, cfg_.lambda / k_.c_mu, k_.L, k_.m),
        theta_hat_(Vector::Zero(cfg_.d)) {}

  UcbDecision decide(std::span<const Vector> actions) override {
    last_ = estimate(state_.view(), cfg_.link, cfg_.lambda, k_.S, state_.V(), theta_hat_);
    theta_hat_ = last_.theta_hat;
    const double rho = rho_sw(rounds_ + 1, cfg_, k_) * cfg_.exploration_scale;
    return select_action(actions, last_.theta_tilde, rho, state_.V(), cfg_.link);
  }

  void observe(const Vector& action, double reward) override {
    state_.update(action, reward);
    ++rounds_;
  }

  const Vector& theta_hat() const override { return theta_hat_; }
  const std::string& name() const override { return name_; }
  std::int64_t rounds() const override { return rounds_; }

  const SlidingWindowState& state() const noexcept { return state_; }
  const MleSolution& last_solution() const noexcept { return last_; }
  const GlmConstants& constants() const noexcept { return k_; }
  const PolicyConfig& config() const noexcept { return cfg_; }

 private:
  static PolicyConfig checked(PolicyConfig cfg) {
    cfg.validate();
    if (!std::holds_alternative<SlidingWindow>(cfg.forgetting))
      throw InvalidArgument("SlidingWindowGlucb: configuration needs a window");
    return cfg;
  }

  PolicyConfig cfg_;
  GlmConstants k_;
  std::string name_;
  SlidingWindowState state_;
  Vector theta_hat_;
  MleSolution last_;
  std::int64_t rounds_ = 0;
};

/// D-GLUCB: discounted penalized MLE, projection in the W~ metric, bonus in W.
class DiscountedGlucb final : public Policy {
 public:
  explicit DiscountedGlucb(PolicyConfig cfg, std::string name = "d_glucb")
      : cfg_(checked(std::move(cfg))), k_(cfg_.constants()), name_(std::move(name)),
        state_(cfg_.d, std::get<Discount>(cfg_.forgetting).gamma, cfg_.lambda / k_.c_mu, k_.L, k_.m),
        theta_hat_(Vector::Zero(cfg_.d)) {}

  UcbDecision decide(std::span<const Vector> actions) override {
    last_ = estimate(state_.view(), cfg_.link, cfg_.lambda, k_.S, state_.W_tilde(), theta_hat_);
    theta_hat_ = last_.theta_hat;
    const double rho = rho_d(rounds_ + 1, cfg_, k_) * cfg_.exploration_scale;
    return select_action(actions, last_.theta_tilde, rho, state_.W(), cfg_.link);
  }

  void observe(const Vector& action, double reward) override {
    state_.update(action, reward);
    ++rounds_;
  }

  const Vector& theta_hat() const override { return theta_hat_; }
  const std::string& name() const override { return name_; }
  std::int64_t rounds() const override { return rounds_; }

  const DiscountedState& state() const noexcept { return state_; }
  const MleSolution& last_solution() const noexcept { return last_; }
  const GlmConstants& constants() const noexcept { return k_; }
  const PolicyConfig& config() const noexcept { return cfg_; }

 private:
  static PolicyConfig checked(PolicyConfig cfg) {
    cfg.validate();
    if (!std::holds_alternative<Discount>(cfg.forgetting))
      throw InvalidArgument("DiscountedGlucb: configuration needs a discount");
    return cfg;
  }

  PolicyConfig cfg_;
  GlmConstants k_;
  std::string name_;
  DiscountedState state_;
  Vector theta_hat_;
  MleSolution last_;
  std::int64_t rounds_ = 0;
};

/// Stationary GLUCB: unwindowed penalized MLE.
inline std::unique_ptr<Policy> make_stationary_glucb(PolicyConfig cfg, std::string name = "glucb") {
  cfg.forgetting = SlidingWindow{SlidingWindowState::unbounded};
  return std::make_unique<SlidingWindowGlucb>(std::move(cfg), std::move(name));
}

}  // namespace glb
