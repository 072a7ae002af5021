#include <gtest/gtest.h>

#include <cmath>

#include "glbandit/environments.hpp"

using namespace glb;

namespace {
Vector vec(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}
}  // namespace

TEST(Schedule, TwoDimensionalLookups) {
  const auto s = abrupt_schedule_2d();
  EXPECT_EQ(s.horizon(), 6000);
  EXPECT_EQ(s.breakpoint_count(), 3);
  EXPECT_EQ(s.breakpoints(), (std::vector<std::int64_t>{1000, 2000, 3000}));
  EXPECT_EQ(s.theta_at(1), vec(1, 0));
  EXPECT_EQ(s.theta_at(1000), vec(1, 0));
  EXPECT_EQ(s.theta_at(1001), vec(-1, 0));
  EXPECT_EQ(s.theta_at(2000), vec(-1, 0));
  EXPECT_EQ(s.theta_at(2001), vec(0, 1));
  EXPECT_EQ(s.theta_at(3001), vec(0, -1));
  EXPECT_EQ(s.theta_at(6000), vec(0, -1));
  EXPECT_DOUBLE_EQ(s.max_norm(), 1.0);
  EXPECT_THROW(s.theta_at(0), InvalidArgument);
  EXPECT_THROW(s.theta_at(6001), InvalidArgument);
}

TEST(Schedule, RejectsMalformedSegments) {
  using Seg = PiecewiseParameterSchedule::Segment;
  EXPECT_THROW(PiecewiseParameterSchedule({}, 10), InvalidArgument);
  EXPECT_THROW(PiecewiseParameterSchedule({Seg{2, vec(1, 0)}}, 10), InvalidArgument);
  EXPECT_THROW(PiecewiseParameterSchedule({Seg{1, vec(1, 0)}, Seg{1, vec(0, 1)}}, 10), InvalidArgument);
  EXPECT_THROW(PiecewiseParameterSchedule({Seg{1, vec(1, 0)}, Seg{11, vec(0, 1)}}, 10), InvalidArgument);
  Vector three(3);
  three << 1, 0, 0;
  EXPECT_THROW(PiecewiseParameterSchedule({Seg{1, vec(1, 0)}, Seg{5, three}}, 10), InvalidArgument);
}

TEST(Sampling, UnitBallRadialLaw) {
  Rng rng = make_rng(1, 0);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const Vector a = sample_unit_ball(2, rng);
    ASSERT_LE(a.norm(), 1.0);
    sum += a.norm();
  }
  EXPECT_NEAR(sum / n, 2.0 / 3.0, 0.01);
}

TEST(Sampling, ActionSetsRespectTheBound) {
  Rng rng = make_rng(2, 0);
  const auto s = abrupt_schedule_2d();
  for (int t = 1; t <= 200; ++t) {
    const SimulatedRound r = sample_round(s, t, 6, LinkFunction::logistic(), rng);
    ASSERT_EQ(r.action_set.size(), 6u);
    for (const auto& a : r.action_set) ASSERT_LE(a.norm(), 1.0);
    EXPECT_EQ(r.best_mean, best_mean_of(r.action_set, s.theta_at(t), LinkFunction::logistic()));
  }
  EXPECT_THROW(sample_round(s, 1, 0, LinkFunction::logistic(), rng), InvalidArgument);
}

TEST(Sampling, SameSeedSameRound) {
  const auto s = abrupt_schedule_2d();
  Rng a = make_rng(42, 0), b = make_rng(42, 0);
  const auto ra = sample_round(s, 5, 6, LinkFunction::logistic(), a);
  const auto rb = sample_round(s, 5, 6, LinkFunction::logistic(), b);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(ra.action_set[i], rb.action_set[i]);
  Rng c = make_rng(43, 0);
  EXPECT_NE(sample_round(s, 5, 6, LinkFunction::logistic(), c).action_set[0], ra.action_set[0]);
}

TEST(Rewards, LogisticMeanAtZero) {
  Rng rng = make_rng(3, 1);
  const int n = 100000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += sample_reward(vec(0.5, 0.5), vec(1, -1), LinkFunction::logistic(), rng);
  EXPECT_NEAR(sum / n, 0.5, 0.005);
}

TEST(Rewards, EmpiricalMeanConverges) {
  Rng rng = make_rng(4, 1);
  const int n = 100000;
  for (const auto& [a, theta] : {std::pair{vec(0.9, 0.1), vec(1, 0)}, std::pair{vec(-0.7, 0.2), vec(0.6, 0.8)}}) {
    const double mu = LinkFunction::logistic()(a.dot(theta));
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += sample_reward(a, theta, LinkFunction::logistic(), rng);
    EXPECT_LE(std::abs(sum / n - mu), 4 * std::sqrt(mu * (1 - mu) / n) + 1e-3);
  }
  // identity link: bounded noise around the mean
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = sample_reward(vec(0.3, 0.0), vec(1, 0), LinkFunction::identity(), rng);
    ASSERT_GE(x, 0.0);
    ASSERT_LE(x, 1.0);
    sum += x;
  }
  EXPECT_NEAR(sum / n, 0.3, 4 * 0.3 / std::sqrt(3.0 * n) + 1e-3);
  EXPECT_THROW(sample_reward(vec(-0.3, 0.0), vec(1, 0), LinkFunction::identity(), rng), InvalidArgument);
}

TEST(Regret, Examples) {
  SimulatedRound r;
  r.action_set = {vec(1, 0), vec(0, 1)};
  const Vector theta = vec(1, 0);
  r.best_mean = best_mean_of(r.action_set, theta, LinkFunction::identity(), &r.best_index);
  EXPECT_EQ(r.best_index, 0u);
  EXPECT_EQ(instantaneous_regret(r, vec(0, 1), theta, LinkFunction::identity()), 1.0);
  EXPECT_EQ(instantaneous_regret(r, vec(1, 0), theta, LinkFunction::identity()), 0.0);
  EXPECT_THROW(instantaneous_regret(r, vec(0.5, 0.5), theta, LinkFunction::identity()), ChosenNotInSet);
}

TEST(Environment, RegretIsNonNegativeAndStreamsAreDecoupled) {
  SimulatedEnvironment a(abrupt_schedule_2d(), 6, LinkFunction::logistic(), 7);
  SimulatedEnvironment b(abrupt_schedule_2d(), 6, LinkFunction::logistic(), 7);
  for (int t = 1; t <= 1500; ++t) {
    const auto& ra = a.next_round();
    const auto& rb = b.next_round();
    ASSERT_EQ(ra.action_set[3], rb.action_set[3]);
    // different choices must not shift the action stream
    const double xa = a.reward(0);
    const double xb = b.reward(5);
    ASSERT_TRUE(xa == 0.0 || xa == 1.0);
    ASSERT_TRUE(xb == 0.0 || xb == 1.0);
    ASSERT_GE(a.regret(0), 0.0);
    ASSERT_EQ(a.regret(ra.best_index), 0.0);
  }
  EXPECT_EQ(a.theta_star(), vec(-1, 0));
  EXPECT_EQ(a.round(), 1500);
}
