#pragma once

// Linear UCB baselines (LinUCB, SW-LinUCB, D-LinUCB). These follow the
// standard self-normalized ellipsoid radius with sub-gaussian scale m/2 and
// ignore the link function; they exist for comparison only.

#include <cmath>
#include <string>

#include "glbandit/estimators.hpp"
#include "glbandit/policies.hpp"

namespace glb {

/// beta = (m/2) sqrt(2 log(1/delta) + d log(1 + n L^2 / (d lambda))) + sqrt(lambda) S,
/// with n the (effective) sample count.
inline double linear_radius(double n, const PolicyConfig& cfg) {
  const double d = cfg.d;
  return cfg.m / 2.0 * std::sqrt(2.0 * std::log(1.0 / cfg.delta) + d * std::log1p(n * cfg.L * cfg.L / (d * cfg.lambda))) +
         std::sqrt(cfg.lambda) * cfg.S;
}

/// Ridge regression over a sliding window; LinUCB when the window is unbounded.
class SlidingWindowLinUcb final : public Policy {
 public:
  explicit SlidingWindowLinUcb(PolicyConfig cfg, std::string name = "sw_linucb")
      : cfg_(checked(std::move(cfg))), name_(std::move(name)),
        state_(cfg_.d, std::get<SlidingWindow>(cfg_.forgetting).tau, cfg_.lambda, cfg_.L, cfg_.m),
        theta_(Vector::Zero(cfg_.d)) {}

  UcbDecision decide(std::span<const Vector> actions) override {
    const SpdFactor V(state_.V());
    theta_ = V.solve(weighted_reward_sum(state_.view()));
    const auto tau = std::get<SlidingWindow>(cfg_.forgetting).tau;
    const double n = static_cast<double>(std::min<std::uint64_t>(static_cast<std::uint64_t>(rounds_ + 1), tau));
    const double beta = linear_radius(n, cfg_) * cfg_.exploration_scale;
    return select_by_ucb(
        actions, theta_, [&](const Vector& a) { return a.dot(theta_); },
        [&](const Vector& a) { return beta * V.inverse_norm(a); });
  }

  void observe(const Vector& action, double reward) override {
    state_.update(action, reward);
    ++rounds_;
  }

  const Vector& theta_hat() const override { return theta_; }
  const std::string& name() const override { return name_; }
  std::int64_t rounds() const override { return rounds_; }

 private:
  static PolicyConfig checked(PolicyConfig cfg) {
    cfg.validate();
    if (!std::holds_alternative<SlidingWindow>(cfg.forgetting))
      throw InvalidArgument("SlidingWindowLinUcb: configuration needs a window");
    return cfg;
  }

  PolicyConfig cfg_;
  std::string name_;
  SlidingWindowState state_;
  Vector theta_;
  std::int64_t rounds_ = 0;
};

/// Discounted ridge regression; bonus in the W^{-1} W~ W^{-1} norm.
class DiscountedLinUcb final : public Policy {
 public:
  explicit DiscountedLinUcb(PolicyConfig cfg, std::string name = "d_linucb")
      : cfg_(checked(std::move(cfg))), name_(std::move(name)),
        state_(cfg_.d, std::get<Discount>(cfg_.forgetting).gamma, cfg_.lambda, cfg_.L, cfg_.m),
        theta_(Vector::Zero(cfg_.d)) {}

  UcbDecision decide(std::span<const Vector> actions) override {
    const SpdFactor W(state_.W());
    const Matrix& Wt = state_.W_tilde();
    theta_ = W.solve(weighted_reward_sum(state_.view()));
    const double gamma = std::get<Discount>(cfg_.forgetting).gamma;
    const double beta =
        linear_radius(detail::discounted_count(gamma, static_cast<double>(rounds_ + 1)), cfg_) * cfg_.exploration_scale;
    return select_by_ucb(
        actions, theta_, [&](const Vector& a) { return a.dot(theta_); },
        [&](const Vector& a) {
          const Vector y = W.solve(a);
          return beta * std::sqrt(std::max(0.0, y.dot(Wt * y)));
        });
  }

  void observe(const Vector& action, double reward) override {
    state_.update(action, reward);
    ++rounds_;
  }

  const Vector& theta_hat() const override { return theta_; }
  const std::string& name() const override { return name_; }
  std::int64_t rounds() const override { return rounds_; }

 private:
  static PolicyConfig checked(PolicyConfig cfg) {
    cfg.validate();
    if (!std::holds_alternative<Discount>(cfg.forgetting))
      throw InvalidArgument("DiscountedLinUcb: configuration needs a discount");
    return cfg;
  }

  PolicyConfig cfg_;
  std::string name_;
  DiscountedState state_;
  Vector theta_;
  std::int64_t rounds_ = 0;
};

inline std::unique_ptr<Policy> make_linucb(PolicyConfig cfg, std::string name = "linucb") {
  cfg.forgetting = SlidingWindow{SlidingWindowState::unbounded};
  return std::make_unique<SlidingWindowLinUcb>(std::move(cfg), std::move(name));
}

}  // namespace glb
