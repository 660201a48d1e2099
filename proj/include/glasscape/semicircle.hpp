#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>

#include "glasscape/errors.hpp"

namespace glasscape {

/// Semicircle density on [-2,2].
inline double semicircle_density(double x) {
  if (std::abs(x) >= 2.0) return 0.0;
  return std::sqrt(4.0 - x * x) / (2.0 * std::numbers::pi);
}

/// Log potential of the semicircle law, int log|l - x| dmu(l).
inline double omega(double x) {
  double a = std::abs(x);
  double inner = x * x / 4.0 - 0.5;
  if (a <= 2.0) return inner;
  return inner - (a / 4.0 * std::sqrt(x * x - 4.0) - std::log(std::sqrt(x * x / 4.0 - 1.0) + a / 2.0));
}

/// Large deviation rate of the top GOE eigenvalue, defined for x >= sqrt(2).
inline double goe_rate_I1(double x) {
  constexpr double lo = std::numbers::sqrt2;
  if (!(x >= lo * (1.0 - 1e-15))) throw DomainError("goe_rate_I1 needs x >= sqrt(2)");
  double s = std::sqrt(std::max(x * x - 2.0, 0.0));
  return 0.5 * (x * s + std::numbers::ln2 - 2.0 * std::log(x + s));
}

}  // namespace glasscape
