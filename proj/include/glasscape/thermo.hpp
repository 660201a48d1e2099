#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <vector>

#include <boost/math/special_functions/binomial.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "glasscape/complexity.hpp"
#include "glasscape/errors.hpp"
#include "glasscape/mixture.hpp"
#include "glasscape/parallel.hpp"

namespace glasscape {

namespace detail {

inline void check_open_radius(double q) {
  if (!(q > 0.0 && q < 1.0)) throw DomainError("radius q must lie in (0,1)");
}

}  // namespace detail

/// Band coefficient of the k-spin component around a point at radius q.
inline double alpha_k(const Mixture& m, double q, int k) {
  detail::check_open_radius(q);
  if (k < 0) throw DomainError("alpha_k needs k >= 0");
  double s = 0.0;
  for (auto [p, c] : m.coeffs()) {
    if (p < k) continue;
    s += c * boost::math::binomial_coefficient<double>(p, k) * std::pow(q, 2 * (p - k));
  }
  return std::pow(1.0 - q * q, 0.5 * k) * std::sqrt(s);
}

/// Log weight of a band around a q-critical point at energy E (closed form).
inline double lambda_Z(const Mixture& m, double beta, double E, double q) {
  detail::check_open_radius(q);
  double s = q * q;
  return -beta * E + 0.5 * std::log(1.0 - s) + 0.5 * beta * beta * (m(1.0) - m(s) - (1.0 - s) * m(s, 1));
}

/// Same quantity summed over the k >= 2 band components.
inline double lambda_Z_series(const Mixture& m, double beta, double E, double q) {
  detail::check_open_radius(q);
  double tail = 0.0;
  for (int k = m.max_degree(); k >= 2; --k) {
    double a = alpha_k(m, q, k);
    tail += a * a;
  }
  return -beta * E + 0.5 * std::log(1.0 - q * q) + 0.5 * beta * beta * tail;
}

namespace detail {

inline void check_two_spin_regime(const Mixture& m, double beta, double q, bool allow_out_of_regime) {
  if (!allow_out_of_regime && beta * alpha_k(m, q, 2) < 1.0 / std::numbers::sqrt2 * (1.0 - 1e-12))
    throw PreconditionError("band two-spin part is not in its high temperature regime");
}

}  // namespace detail

/// Free energy of the band truncated to spins of order two and below.
inline double lambda_F_2minus(const Mixture& m, double beta, double E, double q, bool allow_out_of_regime = false) {
  detail::check_open_radius(q);
  detail::check_two_spin_regime(m, beta, q, allow_out_of_regime);
  return -beta * E + std::numbers::sqrt2 * beta * alpha_k(m, q, 2) - 0.25 * std::log(beta * beta * m(q * q, 2)) - 0.75;
}

/// Unsimplified form of lambda_F_2minus.
inline double lambda_F_2minus_expanded(const Mixture& m, double beta, double E, double q,
                                       bool allow_out_of_regime = false) {
  detail::check_open_radius(q);
  detail::check_two_spin_regime(m, beta, q, allow_out_of_regime);
  double ba = beta * alpha_k(m, q, 2);
  return -beta * E + 0.5 * std::log(1.0 - q * q) + std::numbers::sqrt2 * ba - 0.5 * std::log(ba) - 0.75 -
         0.25 * std::numbers::ln2;
}

/// Limit of beta*(1 - q_c).
inline double t_c(const Mixture& m) { return 1.0 / (2.0 * std::sqrt(m(1.0, 2))); }

struct TRoots {
  double t_minus, t_plus;
};

/// Roots of x0 - 1/(2t) - 2 nu''(1) t.
inline TRoots t_roots(const Mixture& m, double x0_at_1) {
  double n2 = m(1.0, 2);
  double disc = x0_at_1 * x0_at_1 - 4.0 * n2;
  if (!(disc > 0.0)) throw PreconditionError("radial ground state derivative does not exceed the bulk edge");
  double r = std::sqrt(disc);
  return {(x0_at_1 - r) / (4.0 * n2), (x0_at_1 + r) / (4.0 * n2)};
}

/// Largest q in (0,1) with alpha_2(q) = 1/(beta sqrt 2).
inline double q_c(const Mixture& m, double beta) {
  if (!(beta > 0.0)) throw DomainError("beta must be positive");
  const double target = 1.0 / (beta * std::numbers::sqrt2);
  auto f = [&](double t) { return alpha_k(m, 1.0 - t, 2) - target; };
  // scan t = 1 - q geometrically upward from 0
  const int n = 4096;
  double prev_t = 0.0;
  for (int i = 0; i < n; ++i) {
    double t = std::pow(10.0, -14.0 + 14.0 * i / (n - 1)) * (1.0 - 1e-12);
    if (f(t) >= 0.0) {
      std::uintmax_t iters = 200;
      double lo = prev_t > 0.0 ? prev_t : t * 0.5;
      auto br = boost::math::tools::bisect(f, lo, t, detail::AbsTolerance{1e-15}, iters);
      return 1.0 - 0.5 * (br.first + br.second);
    }
    prev_t = t;
  }
  throw PreconditionError("beta too small: no two-spin transition radius");
}

/// Derivative of lambda_Z(-E0(q), q) in q, given x0(q).
inline double lambda_Z_slope(const Mixture& m, double beta, double q, double x0) {
  double s = q * q;
  return beta * x0 - q / (1.0 - s) - beta * beta * (1.0 - s) * q * m(s, 2);
}

struct QStarResult {
  double q_star, q_star_star;
  double slope_at_q_star;
};

/// Local maximum q* (larger root) and local minimum q** of lambda_Z(-E0(q), q) near q = 1.
inline QStarResult q_star(const Mixture& m, double beta) {
  if (!(beta > 1.0)) throw PreconditionError("beta too small for the band analysis");
  const int n = 2048;
  const double lo = std::max(1.0 - std::log(beta) / beta, 1e-3), hi = 1.0 - 1e-4 / beta;
  auto g = [&](double q) { return lambda_Z_slope(m, beta, q, ground_state_solution(m, q).x0); };
  std::vector<double> qs(n), gs(n);
  parallel_for(n, [&](std::size_t i) {
    qs[i] = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
    gs[i] = g(qs[i]);
  });
  int down = -1;
  for (int i = n - 2; i >= 0; --i)
    if (gs[i] > 0.0 && gs[i + 1] <= 0.0) {
      down = i;
      break;
    }
  int up = -1;
  for (int i = down - 1; i >= 0; --i)
    if (gs[i] <= 0.0 && gs[i + 1] > 0.0) {
      up = i;
      break;
    }
  if (down < 0 || up < 0) throw PreconditionError("no band transition on the scan range; beta too small");
  std::uintmax_t iters = 200;
  auto a = boost::math::tools::bisect(g, qs[down], qs[down + 1], detail::AbsTolerance{1e-14}, iters);
  iters = 200;
  auto b = boost::math::tools::bisect(g, qs[up], qs[up + 1], detail::AbsTolerance{1e-14}, iters);
  double qstar = 0.5 * (a.first + a.second);
  return {qstar, 0.5 * (b.first + b.second), g(qstar)};
}

/// lambda_Z evaluated along the ground state curve.
inline double lambda_Z_ground(const Mixture& m, double beta, double q) {
  return lambda_Z(m, beta, -ground_state_solution(m, q).e0, q);
}

struct FreeEnergy {
  double f_beta;
  double argmax_q;
};

/// sup over [q_c, 1) of lambda_Z(-E0(q), q).
inline FreeEnergy free_energy(const Mixture& m, double beta) {
  double lo = q_c(m, beta), hi = 1.0 - 1e-4 / beta;
  auto r = detail::grid_then_brent([&](double q) { return lambda_Z_ground(m, beta, q); }, lo, hi, 64);
  return {r.value, r.argmax};
}

/// Limit of the gap as beta grows.
inline double gap_limit(const Mixture& m, double x0_at_1) {
  auto t = t_roots(m, x0_at_1);
  double tc = t_c(m), n2 = m(1.0, 2);
  return (tc - t.t_minus) * x0_at_1 + 0.5 * std::log(t.t_minus / tc) + n2 * (t.t_minus * t.t_minus - tc * tc);
}

struct PhaseSummary {
  double beta;
  double q_c, q_star, q_star_star;
  double e_star;
  double f_beta;
  double t_minus, t_plus, t_c;
  double gap_finite, gap_limit;
};

inline PhaseSummary phase_summary(const Mixture& m, double beta) {
  PhaseSummary s{};
  s.beta = beta;
  auto g1 = ground_state_solution(m, 1.0);
  auto t = t_roots(m, g1.x0);
  s.t_minus = t.t_minus;
  s.t_plus = t.t_plus;
  s.t_c = t_c(m);
  s.q_c = q_c(m, beta);
  auto qs = q_star(m, beta);
  s.q_star = qs.q_star;
  s.q_star_star = qs.q_star_star;
  s.e_star = ground_state_solution(m, s.q_star).e0;
  s.f_beta = lambda_Z(m, beta, -s.e_star, s.q_star);
  s.gap_finite = s.f_beta - lambda_Z_ground(m, beta, s.q_c);
  s.gap_limit = gap_limit(m, g1.x0);
  return s;
}

struct Gap {
  double finite, limit;
};

inline Gap gap(const Mixture& m, double beta) {
  auto s = phase_summary(m, beta);
  return {s.gap_finite, s.gap_limit};
}

}  // namespace glasscape
