#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "glasscape/errors.hpp"
#include "glasscape/mixture.hpp"
#include "glasscape/semicircle.hpp"

namespace glasscape {

namespace detail {

inline void check_radius(double q) {
  if (!(q > 0.0 && q <= 1.0)) throw DomainError("radius q must lie in (0,1]");
}

}  // namespace detail

/// Covariance of the energy and radial derivative at radius q (scaled model evaluated at 1).
inline Eigen::Matrix2d sigma_q(const Mixture& m, double q) {
  detail::check_radius(q);
  double s = q * q;
  double n0 = m(s), n1 = m(s, 1), n2 = m(s, 2);
  Eigen::Matrix2d S;
  S << n0, s * n1, s * n1, s * s * n2 + s * n1;
  return S;
}

/**
 * Complexity of q-critical points at fixed radius, with the mixture
 * derivatives at q^2 cached.  The radial derivative x is per sqrt(N) along
 * the unit outward direction; it enters the covariance as q*x.
 */
class ComplexitySurface {
 public:
  ComplexitySurface(const Mixture& m, double q) : q_(q) {
    detail::check_radius(q);
    if (m.is_pure()) throw DegenerateCovariance("complexity surface needs a mixed model; use theta_pure");
    double s = q * q;
    n0_ = m(s);
    n1_ = m(s, 1);
    n2_ = m(s, 2);
    a_ = n0_;
    b_ = s * n1_;
    c_ = s * s * n2_ + s * n1_;
    det_ = a_ * c_ - b_ * b_;
    if (!(det_ > 1e-13 * a_ * c_)) throw DegenerateCovariance("covariance of energy and radial derivative is singular");
    scale_ = q * std::sqrt(n2_);
    constant_ = 0.5 + 0.5 * std::log(s * n2_ / n1_);
  }

  double q() const { return q_; }
  /// Radial derivative where the Hessian bulk edge touches zero.
  double edge() const { return 2.0 * scale_; }
  double hessian_scale() const { return scale_; }

  double operator()(double u, double x) const {
    double y = q_ * x;
    double quad = (c_ * u * u - 2.0 * b_ * u * y + a_ * y * y) / det_;
    return constant_ - 0.5 * quad + omega(x / scale_);
  }

  /// Conditional mean of x given the energy u.
  double mean_x(double u) const { return b_ * u / (a_ * q_); }

  /// Maximizer of the Gaussian part in u for fixed x.
  double mean_u(double x) const { return b_ * q_ * x / c_; }

 private:
  double q_;
  double n0_, n1_, n2_, a_, b_, c_, det_, scale_, constant_;
};

inline double theta(const Mixture& m, double q, double u, double x) { return ComplexitySurface(m, q)(u, x); }

/// Expanded form at q = 1, valid for normalized mixtures.
inline double theta_expanded(const Mixture& m, double u, double x) {
  if (m.is_pure()) throw DegenerateCovariance("expanded complexity needs a mixed model");
  double n1 = m(1.0, 1), n2 = m(1.0, 2);
  double d = x - n1 * u;
  return 0.5 + 0.5 * std::log(n2 / n1) - 0.5 * u * u - d * d / (2.0 * (n2 + n1 - n1 * n1)) + omega(x / std::sqrt(n2));
}

/// Complexity of the pure p-spin model, where x is fixed by the energy.
inline double theta_pure(int p, double u) {
  if (p < 2) throw DomainError("theta_pure needs p >= 2");
  double pd = p;
  return 0.5 + 0.5 * std::log(pd - 1.0) - 0.5 * u * u + omega(u * std::sqrt(pd / (pd - 1.0)));
}

struct SupResult {
  double value;
  double argmax;
};

namespace detail {

inline constexpr int kSupGrid = 480;

/// Grid scan then Brent on the bracket around the best grid point.
template <class F>
SupResult grid_then_brent(F f, double lo, double hi, int n = kSupGrid) {
  double h = (hi - lo) / (n - 1);
  int best = 0;
  double bv = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    double v = f(lo + i * h);
    if (v > bv) {
      bv = v;
      best = i;
    }
  }
  if (!std::isfinite(bv)) throw NumericFailure("maximization saw no finite value");
  double a = lo + std::max(best - 1, 0) * h;
  double b = lo + std::min(best + 1, n - 1) * h;
  std::uintmax_t iters = 200;
  auto r = boost::math::tools::brent_find_minima([&](double x) { return -f(x); }, a, b,
                                                 std::numeric_limits<double>::digits, iters);
  if (-r.second >= bv) return {-r.second, r.first};
  return {bv, lo + best * h};
}

}  // namespace detail

/// sup over x of the complexity at energy u.
inline SupResult sup_theta_x(const ComplexitySurface& th, double u) {
  double s = th.hessian_scale();
  double xm = th.mean_x(u);
  double lo = std::min(-6.0 * s, xm - 6.0 * s);
  double hi = std::max(2.0 * s, xm + 6.0 * s);
  return detail::grid_then_brent([&](double x) { return th(u, x); }, lo, hi);
}

inline SupResult sup_theta_x(const Mixture& m, double q, double u) { return sup_theta_x(ComplexitySurface(m, q), u); }

/// sup of the complexity over the box [ulo,uhi] x [xlo,xhi].
inline double sup_theta_box(const ComplexitySurface& th, double ulo, double uhi, double xlo, double xhi) {
  auto best_u = [&](double x) { return std::clamp(th.mean_u(x), ulo, uhi); };
  return detail::grid_then_brent([&](double x) { return th(best_u(x), x); }, xlo, xhi, 201).value;
}

/// Threshold energy of nu_q, no renormalization.
inline double e_infinity(const Mixture& m, double q) {
  detail::check_radius(q);
  double s = q * q;
  double a = m(s), b = s * m(s, 1), c = s * s * m(s, 2);
  return (c * a + b * b - b * a) / (b * std::sqrt(c));
}

struct GroundStateSolution {
  double q;
  double e0;
  double x0;
  double e_inf;
  double residual;
};

namespace detail {

struct AbsTolerance {
  double tol;
  bool operator()(double a, double b) const { return std::abs(a - b) <= tol; }
};

}  // namespace detail

/**
 * Ground state energy E0(q) and radial derivative x0(q): the zero of
 * E -> sup_x theta(-E, x) above the threshold energy.
 */
inline GroundStateSolution ground_state_solution(const Mixture& m, double q) {
  ComplexitySurface th(m, q);
  double einf = e_infinity(m, q);
  auto f = [&](double e) { return sup_theta_x(th, -e).value; };
  double flo = f(einf);
  if (!(flo > 0.0)) throw PreconditionError("mixture is not pure-like at this radius");

  double lo = einf;
  double step = 0.25 * einf;
  double hi = einf + step;
  int guard = 0;
  while (f(hi) > 0.0) {
    lo = hi;
    step *= 2.0;
    hi += step;
    if (++guard > 60) throw NumericFailure("could not bracket the ground state energy");
  }
  std::uintmax_t iters = 200;
  auto br = boost::math::tools::bisect(f, lo, hi, detail::AbsTolerance{1e-12}, iters);
  double e0 = 0.5 * (br.first + br.second);
  auto sup = sup_theta_x(th, -e0);
  return {q, e0, -sup.argmax, einf, sup.value};
}

/// Ground state energy of the pure p-spin model.
inline double e0_pure(int p) {
  double lo = 2.0 * std::sqrt((p - 1.0) / p);
  auto f = [p](double e) { return theta_pure(p, -e); };
  if (!(f(lo) > 0.0)) throw PreconditionError("pure model has no positive complexity at threshold");
  double hi = lo + 0.5;
  while (f(hi) > 0.0) hi += 0.5;
  std::uintmax_t iters = 200;
  auto br = boost::math::tools::bisect(f, lo, hi, detail::AbsTolerance{1e-13}, iters);
  return 0.5 * (br.first + br.second);
}

}  // namespace glasscape
