#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/special_functions/binomial.hpp>
#include <gtest/gtest.h>

#include "glasscape/thermo.hpp"

using namespace glasscape;

namespace {

const Mixture near_pure3 = perturb_pure(3, 0.04, 4);
const Mixture even42 = perturb_pure(4, 0.1, 2);

/// Binomial expansion of nu(q^2 + (1-q^2) rho) term by term.
double generating_oracle(const Mixture& m, double q, double rho) {
  double s = 0.0;
  for (auto [p, c] : m.coeffs())
    for (int k = 0; k <= p; ++k)
      s += c * boost::math::binomial_coefficient<double>(p, k) * std::pow(q * q, p - k) *
           std::pow((1 - q * q) * rho, k);
  return s;
}

}  // namespace

TEST(Alpha, LowOrders) {
  for (double q : {0.2, 0.6, 0.95}) {
    EXPECT_NEAR(alpha_k(near_pure3, q, 0), std::sqrt(near_pure3(q * q)), 1e-15);
    EXPECT_NEAR(alpha_k(near_pure3, q, 1), std::sqrt((1 - q * q) * near_pure3(q * q, 1)), 1e-15);
    EXPECT_NEAR(alpha_k(near_pure3, q, 2), (1 - q * q) * std::sqrt(near_pure3(q * q, 2) / 2), 1e-15);
  }
}

TEST(Alpha, GeneratingIdentity) {
  auto rich = Mixture::from_terms({{2, 0.1}, {3, 0.4}, {4, 0.2}, {7, 0.3}});
  for (auto m : {near_pure3, even42, rich})
    for (double q : {0.1, 0.3, 0.5, 0.7, 0.9})
      for (double rho : {-0.8, -0.3, 0.0, 0.4, 0.9}) {
        double lhs = 0.0;
        for (int k = 0; k <= m.max_degree(); ++k) lhs += std::pow(alpha_k(m, q, k), 2) * std::pow(rho, k);
        double rhs = m(q * q + (1 - q * q) * rho);
        EXPECT_NEAR(lhs, rhs, 1e-12);
        EXPECT_NEAR(rhs, generating_oracle(m, q, rho), 1e-14);
      }
}

TEST(LambdaZ, SeriesAndClosedFormAgree) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> ub(0.5, 100.0), ue(-2.0, 2.0), uq(0.01, 0.999);
  for (int i = 0; i < 200; ++i) {
    double b = ub(rng), e = ue(rng), q = uq(rng);
    double a = lambda_Z(near_pure3, b, e, q), s = lambda_Z_series(near_pure3, b, e, q);
    EXPECT_NEAR(a, s, 1e-12 * std::max(1.0, std::abs(a)));
  }
}

TEST(LambdaZ, SmallRadiusLimit) {
  EXPECT_NEAR(lambda_Z(near_pure3, 3.0, 0.0, 1e-6), 0.5 * 9.0, 1e-9);
}

TEST(LambdaZ, LowOrderRewrite) {
  double q = 0.9;
  double a0 = alpha_k(near_pure3, q, 0), a1 = alpha_k(near_pure3, q, 1);
  EXPECT_NEAR(1.0 - a0 * a0 - a1 * a1, 1.0 - near_pure3(0.81) - 0.19 * near_pure3(0.81, 1), 1e-15);
}

TEST(LambdaF, LinesAgree) {
  EXPECT_NEAR(lambda_F_2minus(near_pure3, 30.0, -1.6, 0.97), lambda_F_2minus_expanded(near_pure3, 30.0, -1.6, 0.97),
              1e-12);
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> ub(5.0, 200.0), ue(-2.0, 0.0), uq(0.5, 0.99);
  for (int i = 0; i < 200; ++i) {
    double b = ub(rng), e = ue(rng), q = uq(rng);
    if (b * alpha_k(near_pure3, q, 2) < 1 / std::numbers::sqrt2) continue;
    double x = lambda_F_2minus(near_pure3, b, e, q), y = lambda_F_2minus_expanded(near_pure3, b, e, q);
    EXPECT_NEAR(x, y, 1e-12 * std::max(1.0, std::abs(x)));
  }
}

TEST(LambdaF, RegimeGuardAndBoundary) {
  double b = 40.0, qc = q_c(near_pure3, b);
  EXPECT_TRUE(std::isfinite(lambda_F_2minus(near_pure3, b, -1.6, qc)));
  EXPECT_THROW(lambda_F_2minus(near_pure3, b, -1.6, 0.9999), PreconditionError);
  EXPECT_NO_THROW(lambda_F_2minus(near_pure3, b, -1.6, 0.9999, true));
}

TEST(QC, ClosedFormConstant) {
  auto m = Mixture::from_terms({{2, 0.5}, {4, 0.5}});
  EXPECT_NEAR(m(1.0, 2), 7.0, 1e-15);
  EXPECT_NEAR(t_c(m), 0.188982, 5e-7);
}

TEST(QC, ApproachesAsymptote) {
  double tc = t_c(near_pure3), prev_err = 1e9, prev_q = 0.0;
  for (double b : {20.0, 40.0, 80.0}) {
    double q = q_c(near_pure3, b);
    // bisection oracle on the explicit alpha_2
    double lo = 1 - 3 / b, hi = 1 - 1e-12;
    auto a2 = [&](double x) { return (1 - x * x) * std::sqrt(near_pure3(x * x, 2) / 2) - 1 / (b * std::sqrt(2.0)); };
    for (int i = 0; i < 200; ++i) {
      double mid = 0.5 * (lo + hi);
      (a2(mid) > 0 ? lo : hi) = mid;
    }
    EXPECT_NEAR(q, lo, 1e-13);
    double err = std::abs(b * (1 - q) - tc);
    EXPECT_LT(err, prev_err);
    EXPECT_GT(q, prev_q);
    prev_err = err;
    prev_q = q;
  }
  EXPECT_THROW(q_c(Mixture::from_terms({{2, 1.0}}), 0.1), PreconditionError);
}

TEST(QStar, OrderingAndResidual) {
  double b = 40.0;
  auto r = q_star(near_pure3, b);
  double qc = q_c(near_pure3, b);
  EXPECT_LT(r.q_star_star, qc);
  EXPECT_LT(qc, r.q_star);
  EXPECT_LE(std::abs(r.slope_at_q_star), 1e-8 * b * b);
  // t_+- closed form
  auto g = ground_state_solution(near_pure3, 1.0);
  auto t = t_roots(near_pure3, g.x0);
  double n2 = near_pure3(1.0, 2);
  EXPECT_NEAR(g.x0 - 1 / (2 * t.t_minus) - 2 * n2 * t.t_minus, 0.0, 1e-12);
  EXPECT_NEAR(g.x0 - 1 / (2 * t.t_plus) - 2 * n2 * t.t_plus, 0.0, 1e-12);
  EXPECT_LT(t.t_minus, t_c(near_pure3));
  EXPECT_LT(t_c(near_pure3), t.t_plus);
}

TEST(QStar, LocalMaximumOfBandWeight) {
  double b = 40.0;
  auto r = q_star(near_pure3, b);
  double h = 1e-5;
  double f0 = lambda_Z_ground(near_pure3, b, r.q_star);
  EXPECT_GT(f0, lambda_Z_ground(near_pure3, b, r.q_star - h));
  EXPECT_GT(f0, lambda_Z_ground(near_pure3, b, r.q_star + h));
  double g0 = lambda_Z_ground(near_pure3, b, r.q_star_star);
  EXPECT_LT(g0, lambda_Z_ground(near_pure3, b, r.q_star_star - h));
  EXPECT_LT(g0, lambda_Z_ground(near_pure3, b, r.q_star_star + h));
}

TEST(QStar, SlopeMatchesFiniteDifference) {
  double b = 40.0;
  for (double q : {0.985, 0.992, 0.996}) {
    double h = 1e-6;
    double fd = (lambda_Z_ground(near_pure3, b, q + h) - lambda_Z_ground(near_pure3, b, q - h)) / (2 * h);
    EXPECT_NEAR(fd, lambda_Z_slope(near_pure3, b, q, ground_state_solution(near_pure3, q).x0), 1e-3);
  }
}

TEST(FreeEnergy, ArgmaxIsQStar) {
  double b = 40.0;
  auto f = free_energy(near_pure3, b);
  auto r = q_star(near_pure3, b);
  EXPECT_NEAR(f.argmax_q, r.q_star, 1e-6);
  double qc = q_c(near_pure3, b);
  EXPECT_GE(f.f_beta, lambda_Z_ground(near_pure3, b, qc));
}

TEST(FreeEnergy, LargeBetaExpansion) {
  auto g = ground_state_solution(near_pure3, 1.0);
  auto t = t_roots(near_pure3, g.x0);
  double n2 = near_pure3(1.0, 2), prev = 1e9;
  for (double b : {20.0, 40.0, 80.0}) {
    auto s = phase_summary(near_pure3, b);
    double approx = b * s.e_star + 0.5 * std::log(2 * t.t_minus / b) + t.t_minus * t.t_minus * n2;
    double err = std::abs(s.f_beta - approx);
    EXPECT_LT(err, prev);
    prev = err;
  }
}

TEST(Gap, LimitPositiveAndDegenerate) {
  auto g = ground_state_solution(near_pure3, 1.0);
  EXPECT_GT(gap_limit(near_pure3, g.x0), 0.0);
  auto ge = ground_state_solution(even42, 1.0);
  EXPECT_GT(gap_limit(even42, ge.x0), 0.0);
  // t_minus = t_c makes every term vanish
  double tc = t_c(near_pure3), n2 = near_pure3(1.0, 2);
  double x0 = 1 / (2 * tc) + 2 * n2 * tc;
  EXPECT_NEAR((tc - tc) * x0 + 0.5 * std::log(tc / tc) + n2 * (tc * tc - tc * tc), 0.0, 0.0);
  EXPECT_NEAR(gap_limit(near_pure3, x0 + 1e-7), 0.0, 1e-6);
}

TEST(Gap, FiniteApproachesLimit) {
  double prev = 1e9;
  for (double b : {20.0, 40.0, 80.0, 160.0}) {
    auto gp = gap(near_pure3, b);
    double err = std::abs(gp.finite - gp.limit);
    EXPECT_LT(err, prev);
    prev = err;
  }
}

TEST(Slopes, ReparameterizedLimits) {
  auto g = ground_state_solution(near_pure3, 1.0);
  double n2 = near_pure3(1.0, 2);
  double prev_z = 1e9, prev_f = 1e9;
  for (double b : {40.0, 160.0, 640.0}) {
    double worst_z = 0, worst_f = 0;
    for (double t = 0.05; t <= std::log(b); t += 0.05) {
      double q = 1 - t / b;
      auto gs = ground_state_solution(near_pure3, q);
      double lim = g.x0 - 1 / (2 * t) - 2 * n2 * t;
      worst_z = std::max(worst_z, std::abs(lambda_Z_slope(near_pure3, b, q, gs.x0) / b - lim) / (1 + std::abs(lim)));
      double h = 1e-7;
      auto lf = [&](double x) {
        return lambda_F_2minus(near_pure3, b, -ground_state_solution(near_pure3, x).e0, x, true);
      };
      double fd = (lf(q + h) - lf(q - h)) / (2 * h) / b;
      worst_f = std::max(worst_f, std::abs(fd - (g.x0 - 2 * std::sqrt(n2))));
    }
    EXPECT_LT(worst_z, prev_z);
    EXPECT_LT(worst_f, prev_f);
    prev_z = worst_z;
    prev_f = worst_f;
  }
  EXPECT_GT(g.x0 - 2 * std::sqrt(n2), 0.0);
}
