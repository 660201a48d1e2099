#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

namespace oracle {

/// Composite 20-point Gauss-Legendre with panels graded geometrically toward both ends.
inline double graded_gauss(const std::function<double(double)>& f, double a, double b, int levels = 40) {
  if (b <= a) return 0.0;
  using GL = boost::math::quadrature::gauss<double, 20>;
  double mid = 0.5 * (a + b);
  double s = 0.0;
  double lo = a, hi = mid;
  for (int k = 0; k < levels; ++k) {
    double cut = a + (hi - a) * 0.5;
    s += GL::integrate(f, cut, hi);
    hi = cut;
  }
  s += GL::integrate(f, a, hi);
  lo = mid;
  for (int k = 0; k < levels; ++k) {
    double cut = lo + (b - lo) * 0.5;
    s += GL::integrate(f, lo, cut);
    lo = cut;
  }
  s += GL::integrate(f, lo, b);
  return s;
}

/// int log|l - x| dmu(l) over the semicircle, split at the singular point.
inline double omega_quadrature(double x) {
  auto f = [x](double l) {
    double d = std::abs(l - x);
    if (d == 0.0) return 0.0;
    return std::log(d) * std::sqrt(std::max(4.0 - l * l, 0.0)) / (2.0 * M_PI);
  };
  if (std::abs(x) < 2.0) return graded_gauss(f, -2.0, x) + graded_gauss(f, x, 2.0);
  return graded_gauss(f, -2.0, 2.0);
}

}  // namespace oracle
