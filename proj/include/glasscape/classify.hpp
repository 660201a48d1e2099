#pragma once

#include <cmath>
#include <string>

#include "glasscape/complexity.hpp"
#include "glasscape/mixture.hpp"

namespace glasscape {

enum class MixtureKind { pure, pure_like, critical, full };

inline std::string to_string(MixtureKind k) {
  switch (k) {
    case MixtureKind::pure: return "pure";
    case MixtureKind::pure_like: return "pure_like";
    case MixtureKind::critical: return "critical";
    case MixtureKind::full: return "full";
  }
  return "unknown";
}

struct Classification {
  MixtureKind kind;
  double g_literal;
  double g_via_theta;
  bool agree;
};

/// Closed-form classifier from nu(1), nu'(1), nu''(1).
inline double g_literal(const Mixture& m) {
  double n0 = m(1.0), n1 = m(1.0, 1), n2 = m(1.0, 2);
  return std::log(n2 / n1) - (n2 + n1) * (n2 * n0 + n1 * n1 - n1 * n0) / (n2 * n1 * n1);
}

/// Complexity at the threshold energy, maximized over x.
inline double g_via_theta(const Mixture& m) {
  double einf = e_infinity(m, 1.0);
  if (m.is_pure()) return theta_pure(m.pure_degree(), -einf);
  return sup_theta_x(m, 1.0, -einf).value;
}

inline Classification classify(const Mixture& m) {
  Classification c{};
  c.g_literal = g_literal(m);
  c.g_via_theta = g_via_theta(m);
  if (m.is_pure()) c.kind = MixtureKind::pure;
  else if (std::abs(c.g_via_theta) <= 1e-9) c.kind = MixtureKind::critical;
  else c.kind = c.g_via_theta > 0.0 ? MixtureKind::pure_like : MixtureKind::full;
  c.agree = std::signbit(c.g_literal) == std::signbit(c.g_via_theta);
  return c;
}

}  // namespace glasscape
