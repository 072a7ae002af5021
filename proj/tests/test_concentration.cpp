#include <gtest/gtest.h>

#include "glbandit/concentration.hpp"

using namespace glb;

TEST(SelfNormalized, ZeroNoiseNeverViolates) {
  SelfNormalizedConfig cfg;
  cfg.noise = NoiseKind::zero;
  cfg.replications = 20;
  cfg.horizon = 200;
  for (const auto& line : validate_concentration(cfg)) {
    EXPECT_EQ(line.violations, 0);
    EXPECT_EQ(line.max_ratio, 0.0);
    EXPECT_TRUE(line.pass);
  }
}

TEST(SelfNormalized, ThresholdGrowsWithTimeAndShrinksWithDelta) {
  SelfNormalizedConfig cfg;
  double prev = 0.0;
  for (std::int64_t t = 1; t <= 500; ++t) {
    const double th = self_normalized_threshold(t, 0.99, cfg);
    ASSERT_GE(th, prev);
    prev = th;
  }
  SelfNormalizedConfig loose = cfg;
  loose.delta = 0.5;
  EXPECT_LT(self_normalized_threshold(10, 0.9, loose), self_normalized_threshold(10, 0.9, cfg));
  // closed form at t = 1, gamma = 0.9, d = 2, sigma = 0.5, delta = 0.1
  EXPECT_NEAR(self_normalized_threshold(1, 0.9, cfg), 0.5 * std::sqrt(2 * std::log(10.0) + 2 * std::log1p(0.5)), 1e-12);
}

TEST(SelfNormalized, ViolationsGrowWithHorizon) {
  // same seeds, so a longer horizon only adds violating replications
  SelfNormalizedConfig cfg;
  cfg.replications = 100;
  int prev[2] = {0, 0};
  for (std::int64_t T : {25, 100, 300}) {
    cfg.horizon = T;
    const auto lines = validate_concentration(cfg);
    ASSERT_EQ(lines.size(), 2u);
    for (std::size_t i = 0; i < 2; ++i) {
      EXPECT_NEAR(lines[i].allowed, 0.1 + 2 * std::sqrt(0.001), 1e-15);
      EXPECT_GE(lines[i].violations, prev[i]);
      EXPECT_GT(lines[i].max_ratio, 0.0);
      prev[i] = lines[i].violations;
    }
  }
  const auto again = validate_concentration(cfg);
  EXPECT_EQ(again[0].violations, prev[0]);
  EXPECT_EQ(again[1].violations, prev[1]);
}

TEST(SelfNormalized, Validation) {
  SelfNormalizedConfig cfg;
  cfg.gammas = {1.0};
  EXPECT_THROW(validate_concentration(cfg), InvalidArgument);
  cfg = {};
  cfg.sigma = -1;
  EXPECT_THROW(validate_concentration(cfg), InvalidArgument);
}

TEST(IntervalCoverage, SlidingWindowSmall) {
  IntervalCoverageConfig cfg;
  cfg.policy.d = 2;
  cfg.policy.horizon = 60;
  cfg.policy.delta = 0.1;
  cfg.policy.forgetting = SlidingWindow{30};
  cfg.theta_star = Vector::Zero(2);
  cfg.theta_star << 0.6, -0.8;
  cfg.replications = 20;
  const auto r = interval_coverage(cfg);
  EXPECT_EQ(r.replications, 20);
  EXPECT_LE(r.failure_fraction, r.allowed);
  EXPECT_GT(r.max_ratio, 0.0);
  cfg.theta_star << 3.0, 0.0;
  EXPECT_THROW(interval_coverage(cfg), InvalidArgument);
}
