#pragma once

// Reward-generating environments: a piecewise-stationary simulated GLM world
// and a two-arm replay of a labelled tabular dataset.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "glbandit/errors.hpp"
#include "glbandit/link.hpp"
#include "glbandit/linalg.hpp"

namespace glb {

using Rng = std::mt19937_64;

/// Generator for an independent stream of a seeded experiment.
inline Rng make_rng(std::uint64_t seed, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream};
  return Rng(seq);
}

/// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Uniform point in the d-dimensional ball of the given radius: Gaussian
/// direction, radius U^{1/d}.
inline Vector sample_unit_ball(int d, Rng& rng, double radius = 1.0) {
  std::normal_distribution<double> normal;
  Vector v(d);
  double n = 0.0;
  do {
    for (int i = 0; i < d; ++i) v[i] = normal(rng);
    n = v.norm();
  } while (n == 0.0);
  const double r = radius * std::pow(uniform01(rng), 1.0 / d);
  return v * (r / n);
}

/// theta*_t constant on segments [start_i, start_{i+1}).
class PiecewiseParameterSchedule {
 public:
  struct Segment {
    std::int64_t start;
    Vector theta_star;
  };

  PiecewiseParameterSchedule(std::vector<Segment> segments, std::int64_t horizon)
      : segments_(std::move(segments)), horizon_(horizon) {
    if (segments_.empty()) throw InvalidArgument("schedule: no segments");
    if (segments_.front().start != 1) throw InvalidArgument("schedule: first segment must start at round 1");
    if (horizon_ < 1) throw InvalidArgument("schedule: horizon must be positive");
    for (std::size_t i = 1; i < segments_.size(); ++i) {
      if (segments_[i].start <= segments_[i - 1].start) throw InvalidArgument("schedule: starts must increase");
      if (segments_[i].theta_star.size() != segments_[0].theta_star.size())
        throw InvalidArgument("schedule: inconsistent dimensions");
    }
    if (segments_.back().start > horizon_) throw InvalidArgument("schedule: segment starts after the horizon");
  }

  const Vector& theta_at(std::int64_t t) const {
    if (t < 1 || t > horizon_) throw InvalidArgument("schedule: round outside [1, T]");
    auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                               [](std::int64_t v, const Segment& s) { return v < s.start; });
    return std::prev(it)->theta_star;
  }

  /// Gamma_T: number of parameter changes.
  std::int64_t breakpoint_count() const noexcept { return static_cast<std::int64_t>(segments_.size()) - 1; }

  /// Last round of each segment except the final one.
  std::vector<std::int64_t> breakpoints() const {
    std::vector<std::int64_t> out;
    for (std::size_t i = 1; i < segments_.size(); ++i) out.push_back(segments_[i].start - 1);
    return out;
  }

  int dim() const noexcept { return static_cast<int>(segments_.front().theta_star.size()); }
  std::int64_t horizon() const noexcept { return horizon_; }
  const std::vector<Segment>& segments() const noexcept { return segments_; }

  double max_norm() const {
    double n = 0.0;
    for (const auto& s : segments_) n = std::max(n, s.theta_star.norm());
    return n;
  }

 private:
  std::vector<Segment> segments_;
  std::int64_t horizon_;
};

/// Four unit-norm parameters over T = 6000 rounds with changes after rounds
/// 1000, 2000 and 3000.
inline PiecewiseParameterSchedule abrupt_schedule_2d() {
  auto v = [](double a, double b) {
    Vector x(2);
    x << a, b;
    return x;
  };
  return PiecewiseParameterSchedule({{1, v(1, 0)}, {1001, v(-1, 0)}, {2001, v(0, 1)}, {3001, v(0, -1)}}, 6000);
}

struct SimulatedRound {
  std::vector<Vector> action_set;
  double best_mean = 0.0;
  std::size_t best_index = 0;
};

inline double best_mean_of(const std::vector<Vector>& actions, const Vector& theta_star, const LinkFunction& link,
                           std::size_t* index = nullptr) {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < actions.size(); ++i) {
    const double v = link(actions[i].dot(theta_star));
    if (v > best) {
      best = v;
      if (index) *index = i;
    }
  }
  return best;
}

/// K actions drawn uniformly from the ball of radius L.
inline SimulatedRound sample_round(const PiecewiseParameterSchedule& schedule, std::int64_t t, int K,
                                   const LinkFunction& link, Rng& rng, double L = 1.0) {
  if (K < 1) throw InvalidArgument("sample_round: K must be positive");
  const Vector& theta = schedule.theta_at(t);
  SimulatedRound r;
  r.action_set.reserve(K);
  for (int k = 0; k < K; ++k) r.action_set.push_back(sample_unit_ball(schedule.dim(), rng, L));
  r.best_mean = best_mean_of(r.action_set, theta, link, &r.best_index);
  return r;
}

/// Reward in [0, m] with conditional mean mu(a^T theta*).
///
/// Logistic: Bernoulli(mu) (requires m >= 1). Identity: the mean plus
/// symmetric uniform noise whose half-width keeps the reward inside [0, m];
/// the mean itself must lie in [0, m].
inline double sample_reward(const Vector& action, const Vector& theta_star, const LinkFunction& link, Rng& rng,
                            double m = 1.0) {
  const double mean = link(action.dot(theta_star));
  const double u = uniform01(rng);
  if (link.kind() == LinkKind::logistic) return u < mean ? 1.0 : 0.0;
  if (mean < 0.0 || mean > m) throw InvalidArgument("sample_reward: identity-link mean outside [0, m]");
  const double half_width = std::min(mean, m - mean);
  return std::clamp(mean + (2.0 * u - 1.0) * half_width, 0.0, m);
}

/// best_mean - mu(chosen^T theta*); `chosen` must be an element of the set.
inline double instantaneous_regret(const SimulatedRound& round, const Vector& chosen, const Vector& theta_star,
                                   const LinkFunction& link) {
  const bool member = std::any_of(round.action_set.begin(), round.action_set.end(),
                                  [&](const Vector& a) { return a.size() == chosen.size() && a == chosen; });
  if (!member) throw ChosenNotInSet("instantaneous_regret: chosen action is not in the action set");
  return std::max(0.0, round.best_mean - link(chosen.dot(theta_star)));
}

/// Simulated piecewise-stationary environment. Action sets and reward noise
/// come from two separate streams so that policies run against the same seed
/// see identical action sets and coupled rewards.
class SimulatedEnvironment {
 public:
  SimulatedEnvironment(PiecewiseParameterSchedule schedule, int K, LinkFunction link, std::uint64_t seed,
                       double L = 1.0, double m = 1.0)
      : schedule_(std::move(schedule)), K_(K), link_(link), L_(L), m_(m),
        action_rng_(make_rng(seed, 0)), reward_rng_(make_rng(seed, 1)) {}

  const SimulatedRound& next_round() {
    ++t_;
    round_ = sample_round(schedule_, t_, K_, link_, action_rng_, L_);
    return round_;
  }

  double reward(std::size_t index) { return sample_reward(round_.action_set.at(index), theta_star(), link_, reward_rng_, m_); }

  double regret(std::size_t index) const {
    return std::max(0.0, round_.best_mean - link_(round_.action_set.at(index).dot(theta_star())));
  }

  const Vector& theta_star() const { return schedule_.theta_at(t_); }
  std::int64_t round() const noexcept { return t_; }
  const PiecewiseParameterSchedule& schedule() const noexcept { return schedule_; }

 private:
  PiecewiseParameterSchedule schedule_;
  int K_;
  LinkFunction link_;
  double L_;
  double m_;
  Rng action_rng_;
  Rng reward_rng_;
  SimulatedRound round_;
  std::int64_t t_ = 0;
};

}  // namespace glb
