#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "glasscape/semicircle.hpp"
#include "oracles.hpp"

using namespace glasscape;

TEST(Semicircle, Density) {
  EXPECT_NEAR(semicircle_density(0.0), 1.0 / std::numbers::pi, 1e-15);
  EXPECT_EQ(semicircle_density(2.0), 0.0);
  EXPECT_EQ(semicircle_density(3.0), 0.0);
  EXPECT_NEAR(oracle::graded_gauss(semicircle_density, -2.0, 2.0), 1.0, 1e-12);
}

TEST(Omega, BranchValues) {
  EXPECT_DOUBLE_EQ(omega(0.0), -0.5);
  EXPECT_DOUBLE_EQ(omega(2.0), 0.5);
  EXPECT_NEAR(omega(3.0), 1.0353726669943646, 1e-12);
  EXPECT_NEAR(omega(3.0), oracle::omega_quadrature(3.0), 1e-10);
}

TEST(Omega, ContinuousAtEdge) {
  EXPECT_NEAR(omega(2.0 + 1e-14), omega(2.0), 1e-12);
  EXPECT_NEAR(omega(-2.0 - 1e-14), omega(-2.0), 1e-12);
}

TEST(Omega, MatchesQuadratureOnGrid) {
  for (int i = 0; i < 97; ++i) {
    double x = -4.0 + 8.0 * i / 96.0;
    EXPECT_NEAR(omega(x), oracle::omega_quadrature(x), 1e-8) << x;
  }
}

TEST(Omega, EvenAndLipschitz) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-8.0, 8.0);
  for (int i = 0; i < 2000; ++i) {
    double x = u(rng), y = u(rng);
    EXPECT_DOUBLE_EQ(omega(x), omega(-x));
    EXPECT_LE(std::abs(omega(x) - omega(y)), std::abs(x - y) * (1 + 1e-12) + 1e-15);
  }
  EXPECT_LE(std::abs((omega(1e-4) - omega(-1e-4)) / 2e-4), 1e-8);
}

TEST(GoeRate, Values) {
  EXPECT_NEAR(goe_rate_I1(std::numbers::sqrt2), 0.0, 1e-15);
  double s = std::sqrt(2.0);
  double ref = 0.5 * (2.0 * s + std::log(2.0) - 2.0 * std::log(2.0 + s));
  EXPECT_NEAR(goe_rate_I1(2.0), ref, 1e-15);
  EXPECT_NEAR(goe_rate_I1(2.0), 0.5328399753535522, 1e-14);
  EXPECT_GT(goe_rate_I1(10.0), goe_rate_I1(2.0));
  EXPECT_THROW(goe_rate_I1(1.0), DomainError);
}

TEST(GoeRate, NonnegativeIncreasing) {
  double prev = 0.0;
  for (double x = std::numbers::sqrt2; x < 12.0; x += 0.01) {
    double v = goe_rate_I1(x);
    EXPECT_GE(v, prev - 1e-15);
    prev = v;
  }
}
