#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "glasscape/classify.hpp"
#include "glasscape/mixture.hpp"

using namespace glasscape;

namespace {

Mixture mono(int p) { return Mixture::from_terms({{p, 1.0}}); }

Mixture random_mixture(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::map<int, double> t;
  for (int p = 2; p <= 6; ++p)
    if (u(rng) < 0.6) t[p] = u(rng);
  if (t.empty()) t[3] = 1.0;
  return Mixture::from_terms(t);
}

}  // namespace

TEST(Mixture, MonomialDerivative) { EXPECT_DOUBLE_EQ(mono(3)(1.0, 1), 3.0); }

TEST(Mixture, Linearity) {
  auto m = Mixture::from_terms({{2, 0.5}, {3, 0.5}});
  EXPECT_DOUBLE_EQ(m(1.0, 1), 2.5);
  auto n = perturb_pure(3, 0.04, 4);
  EXPECT_NEAR(n(1.0, 2), 6.24, 1e-14);
}

TEST(Mixture, NormalizedToOne) {
  auto m = Mixture::from_terms({{3, 2.0}, {5, 6.0}});
  EXPECT_TRUE(m.normalized());
  EXPECT_NEAR(m(1.0), 1.0, 1e-12);
  auto raw = Mixture::from_terms({{3, 2.0}, {5, 6.0}}, false);
  EXPECT_DOUBLE_EQ(raw(1.0), 8.0);
}

TEST(Mixture, OrderAboveFourRejected) { EXPECT_THROW(mono(6)(0.5, 5), UnsupportedOrder); }

TEST(Mixture, DerivativesMatchFiniteDifferences) {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    auto m = random_mixture(rng);
    for (int k = 1; k <= 4; ++k)
      for (double x = -0.9; x <= 0.9; x += 0.1) {
        double h = 1e-5;
        double fd = (m(x + h, k - 1) - m(x - h, k - 1)) / (2 * h);
        EXPECT_NEAR(m(x, k), fd, 1e-6) << "k=" << k << " x=" << x;
      }
  }
}

TEST(Mixture, NormDistanceExamples) {
  EXPECT_DOUBLE_EQ(norm_distance(mono(3), mono(3)), 0.0);
  EXPECT_DOUBLE_EQ(norm_distance(mono(3), mono(4)), 337.0);
  EXPECT_NEAR(norm_distance(mono(3), perturb_pure(3, 0.04, 4)), 13.48, 1e-12);
}

TEST(Mixture, NormDistanceIsAMetric) {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 200; ++rep) {
    auto a = random_mixture(rng), b = random_mixture(rng), c = random_mixture(rng);
    EXPECT_DOUBLE_EQ(norm_distance(a, b), norm_distance(b, a));
    EXPECT_LE(norm_distance(a, c), norm_distance(a, b) + norm_distance(b, c) + 1e-12);
    EXPECT_EQ(norm_distance(a, a), 0.0);
    if (a.coeffs() != b.coeffs()) {
      EXPECT_GT(norm_distance(a, b), 0.0);
    }
  }
}

TEST(Mixture, PerturbPure) {
  EXPECT_TRUE(perturb_pure(3, 0.0, 4).is_pure());
  auto m = perturb_pure(3, 0.04, 4);
  EXPECT_NEAR(m.coeff(3), 0.96, 1e-15);
  EXPECT_NEAR(m.coeff(4), 0.04, 1e-15);
  auto e = perturb_pure(4, 0.1, 2);
  EXPECT_NEAR(e.coeff(4), 0.9, 1e-15);
  EXPECT_NEAR(e.coeff(2), 0.1, 1e-15);
  EXPECT_TRUE(e.is_even());
  EXPECT_THROW(perturb_pure(3, 0.1, 3), UsageError);
}

TEST(Mixture, ScaledMixture) {
  auto m = perturb_pure(3, 0.04, 4);
  auto s = m.scaled(0.9);
  for (double x : {0.1, 0.5, 1.0}) EXPECT_NEAR(s(x), m(0.81 * x), 1e-15);
  EXPECT_FALSE(s.normalized());
}

TEST(Mixture, DegreeCapDropsTail) {
  auto m = Mixture::from_terms({{3, 1.0}, {80, 1e-6}}, false);
  EXPECT_EQ(m.max_degree(), 3);
  EXPECT_DOUBLE_EQ(m.dropped_tail(), 1e-6);
}

TEST(MixtureFile, ParsesCommentsAndDirective) {
  std::istringstream in("# near pure\n3 0.96\n4 0.04  # partner\n\nnormalize false\n");
  auto m = parse_mixture(in);
  EXPECT_FALSE(m.normalized());
  EXPECT_DOUBLE_EQ(m.coeff(3), 0.96);
  EXPECT_DOUBLE_EQ(m.coeff(4), 0.04);
}

TEST(MixtureFile, RejectsBadInput) {
  for (const char* text : {"1 0.5\n", "3 -0.1\n", "3 0.5\n3 0.5\n", "x 1\n", "3\n", "normalize maybe\n", "3 1 2\n", ""}) {
    std::istringstream in(text);
    EXPECT_THROW(parse_mixture(in), UsageError) << text;
  }
}

TEST(Classify, PureLiteralClosedForm) {
  for (int p = 3; p <= 12; ++p) {
    auto c = classify(mono(p));
    EXPECT_EQ(c.kind, MixtureKind::pure);
    EXPECT_NEAR(c.g_literal, std::log(p - 1.0) - 2.0, 1e-13);
  }
}

TEST(Classify, NineSpin) {
  auto c = classify(mono(9));
  EXPECT_NEAR(c.g_literal, std::log(8.0) - 2.0, 1e-13);
  EXPECT_GT(c.g_via_theta, 0.0);
}

TEST(Classify, ThreeSpinFormulasDisagree) {
  auto c = classify(mono(3));
  EXPECT_NEAR(c.g_literal, std::log(2.0) - 2.0, 1e-13);
  EXPECT_NEAR(c.g_via_theta, 1.0 + 0.5 * std::log(2.0) - 4.0 / 3.0, 1e-13);
  EXPECT_EQ(c.kind, MixtureKind::pure);
  EXPECT_FALSE(c.agree);
}

TEST(Classify, NearPureThreeIsPureLike) {
  auto c = classify(perturb_pure(3, 0.04, 4));
  EXPECT_EQ(c.kind, MixtureKind::pure_like);
  // grid oracle on the threshold slice
  auto m = perturb_pure(3, 0.04, 4);
  double einf = e_infinity(m, 1.0), best = -1e9;
  for (double x = -20; x <= 10; x += 1e-4) best = std::max(best, theta(m, 1.0, -einf, x));
  EXPECT_NEAR(c.g_via_theta, best, 1e-7);
  EXPECT_NEAR(c.g_via_theta, 0.014366362247850706, 1e-9);
}

TEST(Classify, TwoSpinHeavyMixtureIsFull) {
  auto c = classify(Mixture::from_terms({{2, 0.7}, {10, 0.3}}));
  EXPECT_EQ(c.kind, MixtureKind::full);
}
