#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "glbandit/link.hpp"

using namespace glb;

TEST(Link, LogisticValues) {
  const auto mu = LinkFunction::logistic();
  EXPECT_DOUBLE_EQ(mu(0.0), 0.5);
  EXPECT_NEAR(mu(2.0), 1.0 / (1.0 + std::exp(-2.0)), 1e-15);
  EXPECT_NEAR(mu(-2.0), 1.0 - mu(2.0), 1e-15);
  // no overflow in the tails
  EXPECT_EQ(mu(-800.0), 0.0);
  EXPECT_EQ(mu(800.0), 1.0);
  EXPECT_DOUBLE_EQ(mu.derivative(0.0), 0.25);
}

TEST(Link, IdentityValues) {
  const auto mu = LinkFunction::identity();
  EXPECT_EQ(mu(0.3), 0.3);
  EXPECT_EQ(mu.derivative(-7.0), 1.0);
  EXPECT_EQ(compute_k_mu(mu), 1.0);
  EXPECT_EQ(compute_c_mu(mu, 3.0, 4.0), 1.0);
}

TEST(Link, DerivativeMatchesFiniteDifference) {
  const auto mu = LinkFunction::logistic();
  for (double x = -6.0; x <= 6.0; x += 0.37) {
    const double h = 1e-5;
    const double fd = (mu(x + h) - mu(x - h)) / (2 * h);
    EXPECT_NEAR(mu.derivative(x), fd, 1e-9) << x;
  }
}

TEST(Link, CMuClosedForm) {
  const auto mu = LinkFunction::logistic();
  EXPECT_NEAR(compute_c_mu(mu, 1.0, 1.0), 0.196611933241482, 1e-14);
  EXPECT_EQ(compute_k_mu(mu), 0.25);
  EXPECT_LE(compute_c_mu(mu, 2.0, 3.0), compute_k_mu(mu));
}

TEST(Link, CMuIsALowerBoundOnTheRegion) {
  const auto mu = LinkFunction::logistic();
  std::mt19937_64 rng(11);
  for (double LS : {0.5, 1.0, 3.0, 7.5}) {
    const double c = compute_c_mu(mu, LS, 1.0);
    std::uniform_real_distribution<double> u(-LS, LS);
    for (int i = 0; i < 10000; ++i) ASSERT_GE(mu.derivative(u(rng)), c - 1e-12);
  }
}

TEST(Link, GoldenSectionReturnsTheMinimumValue) {
  EXPECT_NEAR(detail::golden_section_min([](double v) { return (v - 0.3) * (v - 0.3) + 2.0; }, 0.0, 1.0), 2.0, 1e-12);
  // minimum on the boundary
  EXPECT_NEAR(detail::golden_section_min([](double v) { return v; }, 0.5, 1.0), 0.5, 1e-12);
}

TEST(Link, RejectsBadBounds) {
  EXPECT_THROW(compute_c_mu(LinkFunction::logistic(), -1.0, 1.0), InvalidArgument);
  EXPECT_THROW(compute_c_mu(LinkFunction::logistic(), 1.0, -1.0), InvalidArgument);
  // sigma'(800) underflows to zero
  EXPECT_THROW(compute_c_mu(LinkFunction::logistic(), 40.0, 20.0), InvalidArgument);
}

TEST(Link, ConstantsBundle) {
  const auto k = GlmConstants::make(LinkFunction::logistic(), 1.0, 1.0, 1.0);
  EXPECT_EQ(k.k_mu, 0.25);
  EXPECT_NEAR(k.c_mu, 0.196611933241482, 1e-14);
  EXPECT_LE(k.c_mu, k.k_mu);
}
