#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "glasscape/classify.hpp"
#include "glasscape/complexity.hpp"
#include "glasscape/errors.hpp"
#include "glasscape/mixture.hpp"
#include "glasscape/semicircle.hpp"

namespace glasscape {

/**
 * Scalar coefficients of the two-point conditional covariance structure.
 * Argument order is (r, q1, q2); several blocks use the swapped order.
 */
class PairTerms {
 public:
  explicit PairTerms(const Mixture& m) : m_(m) {}

  double nu(double x, int k = 0) const { return m_(x, k); }

  double a1(double r, double q1, double q2) const {
    double c = q1 * q2 * r;
    return nu(q2 * q2, 1) / d1(c, q1, q2);
  }
  double a3(double r, double q1, double q2) const {
    double c = q1 * q2 * r;
    return -nu(c, 1) / d1(c, q1, q2);
  }
  double a2(double r, double q1, double q2) const { return nu(q2 * q2, 1) / d2(r, q1, q2); }
  double a4(double r, double q1, double q2) const { return -cross(r, q1, q2) / d2(r, q1, q2); }

  double v1(double r, double q1, double q2) const {
    double c = q1 * q2 * r;
    return c * nu(c, 2) + nu(c, 1);
  }
  double v2(double r, double q1, double q2) const {
    double c = q1 * q2 * r;
    return -q1 * q2 * q2 * nu(c, 3) * (1.0 - r * r) + 2.0 * r * q2 * nu(c, 2);
  }
  double v3(double r, double q1, double q2) const {
    double c = q1 * q2 * r;
    return q1 * q1 * q2 * r * nu(c, 3) + 2.0 * q1 * nu(c, 2);
  }

  /// Only defined at q1 = q2 = 1.
  double b1(double r) const { return -nu(1.0, 1) + a2(r, 1, 1) * (1 - r * r) * nu(r, 1) * v1(r, 1, 1); }
  double b2(double r) const { return -r * nu(r, 1) - a4(r, 1, 1) * (1 - r * r) * nu(r, 1) * v1(r, 1, 1); }
  double b3(double r) const { return a2(r, 1, 1) * (1 - r * r) * nu(r, 1) * v2(r, 1, 1); }
  double b4(double r) const { return nu(r, 2) * (1 - r * r) - a4(r, 1, 1) * (1 - r * r) * nu(r, 1) * v2(r, 1, 1); }

  double u11(double r, double q1, double q2) const {
    double c = q1 * q2 * r, d = nu(c, 1);
    return nu(q1 * q1) - q1 * q1 * a2(r, q2, q1) * d * d * (1 - r * r);
  }
  double u12(double r, double q1, double q2) const {
    double c = q1 * q2 * r, d = nu(c, 1);
    return nu(c) + q1 * q2 * a4(r, q1, q2) * d * d * (1 - r * r);
  }
  double x11(double r, double q1, double q2) const {
    double w = v1(r, q1, q2);
    return q1 * q1 * nu(q1 * q1, 2) + nu(q1 * q1, 1) - w * w * (1 - r * r) * a2(r, q2, q1);
  }
  double x12(double r, double q1, double q2) const {
    double c = q1 * q2 * r, w = v1(r, q1, q2);
    return c * r * nu(c, 2) + r * nu(c, 1) + w * w * (1 - r * r) * a4(r, q1, q2);
  }
  double sb11(double r, double q1, double q2) const {
    double c = q1 * q2 * r;
    return q1 * nu(q1 * q1, 1) - q1 * (1 - r * r) * nu(c, 1) * v1(r, q1, q2) * a2(r, q2, q1);
  }
  /// Covariance of the first energy with the second radial derivative.
  double sb12(double r, double q1, double q2) const {
    double c = q1 * q2 * r;
    return q1 * r * nu(c, 1) + q1 * (1 - r * r) * nu(c, 1) * v1(r, q1, q2) * a4(r, q1, q2);
  }

 private:
  double d1(double c, double q1, double q2) const {
    double d = nu(c, 1);
    return nu(q1 * q1, 1) * nu(q2 * q2, 1) - d * d;
  }
  double cross(double r, double q1, double q2) const {
    double c = q1 * q2 * r;
    return r * nu(c, 1) - q1 * q2 * nu(c, 2) * (1 - r * r);
  }
  double d2(double r, double q1, double q2) const {
    double k = cross(r, q1, q2);
    return nu(q1 * q1, 1) * nu(q2 * q2, 1) - k * k;
  }

  const Mixture& m_;
};

struct PairCovariance {
  double r, q1, q2;
  double a1, a2, a3, a4;
  double v1, v2, v3;
  /// NaN unless q1 = q2 = 1.
  double b1, b2, b3, b4;
  Eigen::Matrix2d sigma_U, sigma_X, sigma_b;
  /// Acts on (U1, U2, X1, X2).
  Eigen::Matrix4d sigma_UX;
  Eigen::Matrix2d sigma_Z, sigma_Q;
  Eigen::Vector4d varsigma1, varsigma2;
};

namespace detail {

inline void check_pair_args(double r, double q1, double q2) {
  if (!(std::abs(r) < 1.0)) throw DomainError("overlap r must lie in (-1,1)");
  check_radius(q1);
  check_radius(q2);
}

inline constexpr double kMaxCondition = 1e12;

/// Cholesky of a covariance with a condition number guard.
inline Eigen::LLT<Eigen::Matrix4d> factor_checked(const Eigen::Matrix4d& S) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(S, Eigen::EigenvaluesOnly);
  double lo = es.eigenvalues()(0), hi = es.eigenvalues()(3);
  if (!(lo > 0.0) || hi / lo > kMaxCondition) throw DegenerateCovariance("pair covariance is singular or ill-conditioned");
  return Eigen::LLT<Eigen::Matrix4d>(S);
}

}  // namespace detail

/// Energy/radial block only; cheaper than the full assembly.
inline Eigen::Matrix4d sigma_UX(const Mixture& m, double r, double q1, double q2) {
  detail::check_pair_args(r, q1, q2);
  PairTerms t(m);
  double u11 = t.u11(r, q1, q2), u22 = t.u11(r, q2, q1), u12 = t.u12(r, q1, q2);
  double x11 = t.x11(r, q1, q2), x22 = t.x11(r, q2, q1), x12 = t.x12(r, q1, q2);
  double b11 = t.sb11(r, q1, q2), b22 = t.sb11(r, q2, q1);
  double b12 = t.sb12(r, q1, q2), b21 = t.sb12(r, q2, q1);
  Eigen::Matrix4d S;
  S << u11, u12, b11, b12,
       u12, u22, b21, b22,
       b11, b21, x11, x12,
       b12, b22, x12, x22;
  return S;
}

inline PairCovariance assemble(const Mixture& m, double r, double q1, double q2) {
  detail::check_pair_args(r, q1, q2);
  PairTerms t(m);
  PairCovariance pc{};
  pc.r = r;
  pc.q1 = q1;
  pc.q2 = q2;
  const double s = 1.0 - r * r;
  const double c = q1 * q2 * r;
  pc.a1 = t.a1(r, q1, q2);
  pc.a2 = t.a2(r, q1, q2);
  pc.a3 = t.a3(r, q1, q2);
  pc.a4 = t.a4(r, q1, q2);
  pc.v1 = t.v1(r, q1, q2);
  pc.v2 = t.v2(r, q1, q2);
  pc.v3 = t.v3(r, q1, q2);
  if (q1 == 1.0 && q2 == 1.0) {
    pc.b1 = t.b1(r);
    pc.b2 = t.b2(r);
    pc.b3 = t.b3(r);
    pc.b4 = t.b4(r);
  } else {
    pc.b1 = pc.b2 = pc.b3 = pc.b4 = std::numeric_limits<double>::quiet_NaN();
  }

  pc.sigma_UX = sigma_UX(m, r, q1, q2);
  pc.sigma_U = pc.sigma_UX.topLeftCorner<2, 2>();
  pc.sigma_X = pc.sigma_UX.bottomRightCorner<2, 2>();
  pc.sigma_b = pc.sigma_UX.topRightCorner<2, 2>();

  const double n1c = t.nu(c, 1), n2c = t.nu(c, 2), n3c = t.nu(c, 3), n4c = t.nu(c, 4);
  const double h1 = t.nu(q1 * q1, 2), h2 = t.nu(q2 * q2, 2);
  const double a4 = pc.a4, v1 = pc.v1;

  pc.sigma_Z(0, 0) = 1.0 - q2 * q2 * s * n2c * n2c * t.a1(r, q2, q1) / h1;
  pc.sigma_Z(1, 1) = 1.0 - q1 * q1 * s * n2c * n2c * t.a1(r, q1, q2) / h2;
  pc.sigma_Z(0, 1) = pc.sigma_Z(1, 0) = (r * n2c - q1 * q2 * s * n3c + q1 * q2 * s * n2c * n2c * pc.a3) / std::sqrt(h1 * h2);

  const double v2_12 = t.v2(r, q1, q2), v2_21 = t.v2(r, q2, q1);
  const double a2_21 = t.a2(r, q2, q1), a2_12 = t.a2(r, q1, q2);
  pc.varsigma1 << q1 * n1c * v2_12 * a2_21,
                  q2 * q2 * n2c - q2 * n1c * v2_12 * a4,
                  v1 * v2_12 * a2_21,
                  t.v3(r, q2, q1) - v1 * v2_12 * a4;
  pc.varsigma1 /= std::sqrt(h1);
  pc.varsigma2 << q1 * q1 * n2c - q1 * n1c * v2_21 * a4,
                  q2 * n1c * v2_21 * a2_12,
                  t.v3(r, q1, q2) - v1 * v2_21 * a4,
                  v1 * v2_21 * a2_12;
  pc.varsigma2 /= std::sqrt(h2);

  auto llt = detail::factor_checked(pc.sigma_UX);
  Eigen::Vector4d w1 = llt.solve(pc.varsigma1), w2 = llt.solve(pc.varsigma2);
  pc.sigma_Q(0, 0) = 2.0 - s * a2_21 * v2_12 * v2_12 / h1 - s * s * pc.varsigma1.dot(w1);
  pc.sigma_Q(1, 1) = 2.0 - s * a2_12 * v2_21 * v2_21 / h2 - s * s * pc.varsigma2.dot(w2);
  pc.sigma_Q(0, 1) = pc.sigma_Q(1, 0) =
      (q1 * q1 * q2 * q2 * n4c * s * s - 4.0 * c * s * n3c + 2.0 * r * r * n2c + s * v2_12 * v2_21 * a4) / std::sqrt(h1 * h2) -
      s * s * pc.varsigma1.dot(w2);
  return pc;
}

/// Exponential growth rate of pairs of critical points at overlap r.
inline double psi(const Mixture& m, double q1, double q2, double r, double u1, double u2, double x1, double x2) {
  detail::check_pair_args(r, q1, q2);
  if (m.is_pure()) throw DegenerateCovariance("pair complexity needs a mixed model");
  Eigen::Matrix4d S = sigma_UX(m, r, q1, q2);
  auto llt = detail::factor_checked(S);
  Eigen::Vector4d w(u1, u2, x1, x2);
  double quad = w.dot(llt.solve(w));
  double c = q1 * q2 * r;
  double h1 = m(q1 * q1, 2), h2 = m(q2 * q2, 2);
  double dc = m(c, 1);
  double den = m(q1 * q1, 1) * m(q2 * q2, 1) - dc * dc;
  double lg = 1.0 + 0.5 * std::log((1 - r * r) * q1 * q1 * q2 * q2 * h1 * h2 / den);
  return lg - 0.5 * quad + omega(x1 / (q1 * std::sqrt(h1))) + omega(x2 / (q2 * std::sqrt(h2)));
}

/**
 * Pair complexity profile at the ground state parameters for q1 = q2 = 1.
 * Uses the exchange symmetry of the two points to work with a 2x2 block,
 * which stays well conditioned up to |r| close to 1.
 */
inline double psi0_interior(const Mixture& m, const GroundStateSolution& gs, double r) {
  if (!(std::abs(r) < 1.0)) throw DomainError("overlap r must lie in (-1,1)");
  PairTerms t(m);
  double n1 = m(1.0, 1), n2 = m(1.0, 2), d = m(r, 1);
  double su = t.u11(r, 1, 1) + t.u12(r, 1, 1);
  double sb = t.sb11(r, 1, 1) + t.sb12(r, 1, 1);
  double sx = t.x11(r, 1, 1) + t.x12(r, 1, 1);
  double det = su * sx - sb * sb;
  if (!(det > 0.0)) throw DegenerateCovariance("symmetric pair block is singular");
  double u = -gs.e0, x = -gs.x0;
  double quad = 2.0 * (sx * u * u - 2.0 * sb * u * x + su * x * x) / det;
  double lg = 1.0 + 0.5 * std::log((1 - r * r) * n2 * n2 / ((n1 - d) * (n1 + d)));
  return lg - 0.5 * quad + 2.0 * omega(x / std::sqrt(n2));
}

/// Limit of the profile at r -> +1 (sign > 0) or r -> -1 (sign < 0); -inf when it diverges.
inline double psi0_endpoint(const Mixture& m, const GroundStateSolution& gs, int sign) {
  constexpr double neg_inf = -std::numeric_limits<double>::infinity();
  if (sign < 0 && !m.is_even()) return neg_inf;
  constexpr int k0 = 6, k1 = 16, levels = 3;
  std::vector<double> v;
  for (int k = k0; k <= k1; ++k) v.push_back(psi0_interior(m, gs, sign * (1.0 - std::ldexp(1.0, -k))));
  if (v.back() < -1e3) return neg_inf;
  // Richardson on h = 2^-k, error expanding in powers of h
  std::vector<double> row = v;
  for (int j = 1; j <= levels; ++j) {
    double f = std::ldexp(1.0, j);
    std::vector<double> next;
    for (std::size_t i = 1; i < row.size(); ++i) next.push_back((f * row[i] - row[i - 1]) / (f - 1.0));
    row = next;
  }
  return row.back();
}

inline double psi0(const Mixture& m, const GroundStateSolution& gs, double r) {
  if (r >= 1.0) return psi0_endpoint(m, gs, +1);
  if (r <= -1.0) return psi0_endpoint(m, gs, -1);
  return psi0_interior(m, gs, r);
}

inline double psi0(const Mixture& m, double r) { return psi0(m, ground_state_solution(m, 1.0), r); }

/// Second derivative of the profile at 0, central differences with Richardson.
inline double psi0_d2_at_zero(const Mixture& m, const GroundStateSolution& gs) {
  double f0 = psi0_interior(m, gs, 0.0);
  auto cd = [&](double h) { return (psi0_interior(m, gs, h) - 2.0 * f0 + psi0_interior(m, gs, -h)) / (h * h); };
  double d1 = cd(1e-2), d2 = cd(5e-3), d3 = cd(2.5e-3);
  double r1 = (4.0 * d2 - d1) / 3.0, r2 = (4.0 * d3 - d2) / 3.0;
  return (16.0 * r2 - r1) / 15.0;
}

enum class CondMClause { not_mixed, not_pure_like, second_derivative_nonnegative, max_not_unique_at_zero };

inline std::string to_string(CondMClause c) {
  switch (c) {
    case CondMClause::not_mixed: return "not_mixed";
    case CondMClause::not_pure_like: return "not_pure_like";
    case CondMClause::second_derivative_nonnegative: return "second_derivative_nonnegative";
    case CondMClause::max_not_unique_at_zero: return "max_not_unique_at_zero";
  }
  return "unknown";
}

struct CondMVerdict {
  bool holds = false;
  std::optional<CondMClause> failed_clause;
  double psi0_at_zero = std::numeric_limits<double>::quiet_NaN();
  double d2_psi0_at_zero = std::numeric_limits<double>::quiet_NaN();
  double max_margin = std::numeric_limits<double>::quiet_NaN();
  double endpoint_plus = std::numeric_limits<double>::quiet_NaN();
  /// -inf when the profile diverges at r = -1.
  double endpoint_minus = std::numeric_limits<double>::quiet_NaN();
  /// Location of the largest profile value outside the window around 0.
  double runner_up_r = std::numeric_limits<double>::quiet_NaN();
};

/**
 * Checks, in order: the model is mixed, pure-like, the profile has negative
 * curvature at 0, and its maximum over [-1,1] is attained only at 0.
 */
inline CondMVerdict check_condition_m(const Mixture& m, double grid_step = 1e-3) {
  CondMVerdict v;
  if (m.is_pure()) {
    v.failed_clause = CondMClause::not_mixed;
    return v;
  }
  if (classify(m).kind != MixtureKind::pure_like) {
    v.failed_clause = CondMClause::not_pure_like;
    return v;
  }
  if (!(grid_step > 0.0 && grid_step < 0.1)) throw UsageError("grid step must lie in (0,0.1)");
  auto gs = ground_state_solution(m, 1.0);
  v.psi0_at_zero = psi0_interior(m, gs, 0.0);
  v.d2_psi0_at_zero = psi0_d2_at_zero(m, gs);
  v.endpoint_plus = psi0_endpoint(m, gs, +1);
  v.endpoint_minus = psi0_endpoint(m, gs, -1);
  if (!(v.d2_psi0_at_zero < -1e-8)) {
    v.failed_clause = CondMClause::second_derivative_nonnegative;
    return v;
  }

  const int n = static_cast<int>(std::floor(2.0 / grid_step));
  const double h = 2.0 / n;
  const double window = 10.0 * grid_step;
  std::vector<double> rs(n - 1), vals(n - 1);
  for (int i = 1; i < n; ++i) {
    rs[i - 1] = -1.0 + i * h;
    vals[i - 1] = psi0_interior(m, gs, rs[i - 1]);
  }
  double best = -std::numeric_limits<double>::infinity(), best_r = 0.0;
  bool inside_ok = true;
  auto offer = [&](double r, double val) {
    if (val > best || (val == best && std::abs(r) < std::abs(best_r))) {
      best = val;
      best_r = r;
    }
  };
  double running = *std::max_element(vals.begin(), vals.end());
  for (std::size_t i = 0; i < rs.size(); ++i) {
    if (std::abs(rs[i]) < window) {
      if (vals[i] > v.psi0_at_zero + 1e-12) inside_ok = false;
      continue;
    }
    offer(rs[i], vals[i]);
    bool local = i > 0 && i + 1 < rs.size() && vals[i] >= vals[i - 1] && vals[i] >= vals[i + 1];
    if (local || vals[i] >= running - 1e-6) {
      double lo = std::max(i > 0 ? rs[i - 1] : rs[i], rs[i] < 0 ? -1.0 + 1e-12 : window);
      double hi = std::min(i + 1 < rs.size() ? rs[i + 1] : rs[i], rs[i] < 0 ? -window : 1.0 - 1e-12);
      if (hi > lo) {
        std::uintmax_t iters = 100;
        auto r = boost::math::tools::brent_find_minima([&](double x) { return -psi0_interior(m, gs, x); }, lo, hi,
                                                       std::numeric_limits<double>::digits, iters);
        offer(r.first, -r.second);
      }
    }
  }
  offer(1.0, v.endpoint_plus);
  offer(-1.0, v.endpoint_minus);
  v.max_margin = v.psi0_at_zero - best;
  v.runner_up_r = best_r;
  if (!inside_ok || !(v.max_margin > 0.0)) {
    v.failed_clause = CondMClause::max_not_unique_at_zero;
    return v;
  }
  v.holds = true;
  return v;
}

}  // namespace glasscape
