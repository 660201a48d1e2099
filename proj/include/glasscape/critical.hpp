#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "glasscape/errors.hpp"
#include "glasscape/hamiltonian.hpp"
#include "glasscape/parallel.hpp"

namespace glasscape {

struct CriticalPoint {
  Eigen::VectorXd sigma;
  double q = 0.0;
  double energy_per_site = 0.0;
  /// <grad H, sigma/|sigma|> / sqrt(N)
  double radial_per_sqrt = 0.0;
  /// Norm of the spherical gradient.
  double grad_residual = 0.0;
  double hess_min_abs_eig = 0.0;
  int index = 0;
};

/// Orthonormal basis of the tangent space at x, as the columns of an N x (N-1) matrix.
inline Eigen::MatrixXd tangent_basis(const Eigen::VectorXd& x) {
  const Eigen::Index n = x.size();
  Eigen::VectorXd v = x / x.norm();
  // Householder reflection sending v to -sign(v0) e0
  double s = v[0] >= 0.0 ? 1.0 : -1.0;
  v[0] += s;
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(n, n) - (2.0 / v.squaredNorm()) * v * v.transpose();
  return h.rightCols(n - 1);
}

/// Spherical quantities at a point of the sphere of radius |x|.
struct SphericalDerivatives {
  double energy = 0.0;
  double radial = 0.0;
  /// Tangent-frame coordinates.
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
  Eigen::MatrixXd frame;
};

inline SphericalDerivatives spherical_derivatives(const HamiltonianInstance& h, const Eigen::VectorXd& x) {
  auto ev = h.evaluate(x, 2);
  SphericalDerivatives sd;
  double rho = x.norm();
  sd.energy = ev.energy;
  sd.radial = ev.gradient.dot(x) / rho;
  sd.frame = tangent_basis(x);
  sd.gradient = sd.frame.transpose() * ev.gradient;
  sd.hessian = sd.frame.transpose() * ev.hessian * sd.frame;
  sd.hessian.diagonal().array() -= sd.radial / rho;
  return sd;
}

inline CriticalPoint describe_point(const HamiltonianInstance& h, const Eigen::VectorXd& x) {
  auto sd = spherical_derivatives(h, x);
  const double n = h.n();
  CriticalPoint cp;
  cp.sigma = x;
  cp.q = x.norm() / std::sqrt(n);
  cp.energy_per_site = sd.energy / n;
  cp.radial_per_sqrt = sd.radial / std::sqrt(n);
  cp.grad_residual = sd.gradient.norm();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sd.hessian, Eigen::EigenvaluesOnly);
  cp.hess_min_abs_eig = es.eigenvalues().cwiseAbs().minCoeff();
  cp.index = static_cast<int>((es.eigenvalues().array() < 0.0).count());
  return cp;
}

enum class SearchMode {
  /// trust-region minimization; converges to local minima
  minima,
  /// Newton steps when they shrink the gradient, trust region otherwise; any index
  any
};

struct SearchOptions {
  int n_starts = 0;  ///< 0 means 50 N
  double tol = 1e-9;
  int max_iterations = 300;
  SearchMode mode = SearchMode::any;
};

namespace detail {

/// Step minimizing g.d + d.B d/2 over |d| <= radius, with B = Q diag(lam) Q^T.
inline Eigen::VectorXd trust_region_step(const Eigen::VectorXd& lam, const Eigen::MatrixXd& q, const Eigen::VectorXd& g,
                                         double radius) {
  Eigen::VectorXd gq = q.transpose() * g;
  auto step_norm = [&](double mu) { return (gq.array() / (lam.array() + mu)).matrix().norm(); };
  double lo = std::max(0.0, -lam.minCoeff());
  if (lam.minCoeff() > 0.0 && step_norm(0.0) <= radius) return -(q * (gq.array() / lam.array()).matrix());
  double a = lo + 1e-14 * (1.0 + std::abs(lo)), b = a + 1.0;
  while (step_norm(b) > radius) b = a + 2.0 * (b - a);
  if (step_norm(a) < radius) a = b = lo + 1e-12 * (1.0 + std::abs(lo));  // hard case: stay at the shift
  for (int i = 0; i < 100 && b - a > 1e-14 * (1.0 + b); ++i) {
    double mid = 0.5 * (a + b);
    (step_norm(mid) > radius ? a : b) = mid;
  }
  Eigen::VectorXd d = -(q * (gq.array() / (lam.array() + b)).matrix());
  double dn = d.norm();
  if (dn > radius) d *= radius / dn;
  else if (lam.minCoeff() < 0.0 && dn < radius) {
    // hard case: move along the most negative curvature direction to the boundary
    Eigen::VectorXd e = q.col(0);
    double be = d.dot(e), c = dn * dn - radius * radius;
    d += (-be + std::sqrt(be * be - c)) * e;
  }
  return d;
}

inline Eigen::VectorXd retract(const Eigen::VectorXd& x, const Eigen::VectorXd& step, double rho) {
  Eigen::VectorXd y = x + step;
  return y * (rho / y.norm());
}

}  // namespace detail

/**
 * Riemannian Newton / trust-region iteration on the sphere of radius |x0|.
 * Returns true on convergence (spherical gradient <= tol sqrt(N)).
 */
inline bool converge_critical(const HamiltonianInstance& h, Eigen::VectorXd& x, const SearchOptions& opt) {
  const double rho = x.norm(), sqn = std::sqrt(static_cast<double>(h.n()));
  double radius = 0.1 * rho;
  const double max_radius = rho;
  auto sd = spherical_derivatives(h, x);
  for (int it = 0; it < opt.max_iterations; ++it) {
    double gnorm = sd.gradient.norm();
    if (gnorm <= opt.tol * sqn) return true;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sd.hessian);
    const auto& lam = es.eigenvalues();
    const auto& qv = es.eigenvectors();

    if (opt.mode == SearchMode::any && lam.cwiseAbs().minCoeff() > 1e-12) {
      Eigen::VectorXd dn = -(qv * ((qv.transpose() * sd.gradient).array() / lam.array()).matrix());
      if (dn.norm() <= radius) {
        Eigen::VectorXd xn = detail::retract(x, sd.frame * dn, rho);
        auto sn = spherical_derivatives(h, xn);
        if (sn.gradient.norm() < 0.5 * gnorm) {
          x = std::move(xn);
          sd = std::move(sn);
          continue;
        }
      }
    }

    Eigen::VectorXd d = detail::trust_region_step(lam, qv, sd.gradient, radius);
    double predicted = -(sd.gradient.dot(d) + 0.5 * d.dot(sd.hessian * d));
    Eigen::VectorXd xn = detail::retract(x, sd.frame * d, rho);
    if (predicted < 1e-10 * (1.0 + std::abs(sd.energy))) {
      // energy differences are at rounding level; judge by the gradient instead
      auto sn = spherical_derivatives(h, xn);
      if (sn.gradient.norm() < gnorm) {
        x = std::move(xn);
        sd = std::move(sn);
      } else {
        radius *= 0.25;
      }
    } else {
      double actual = sd.energy - h.evaluate(xn, 0).energy;
      double ratio = actual / predicted;
      if (ratio < 0.25) radius *= 0.25;
      else if (ratio > 0.75 && d.norm() > 0.99 * radius) radius = std::min(2.0 * radius, max_radius);
      if (ratio > 0.1) {
        x = std::move(xn);
        sd = spherical_derivatives(h, x);
      }
    }
    if (radius < 1e-14 * rho) return sd.gradient.norm() <= opt.tol * sqn;
  }
  return sd.gradient.norm() <= opt.tol * sqn;
}

/// Merges points with normalized overlap above 1 - 1e-6, keeping the smaller residual.
inline std::vector<CriticalPoint> deduplicate(std::vector<CriticalPoint> pts) {
  std::sort(pts.begin(), pts.end(), [](const CriticalPoint& a, const CriticalPoint& b) {
    return a.grad_residual < b.grad_residual;
  });
  std::vector<CriticalPoint> kept;
  for (auto& p : pts) {
    bool dup = false;
    for (const auto& k : kept)
      if (p.sigma.dot(k.sigma) / (p.sigma.norm() * k.sigma.norm()) > 1.0 - 1e-6) {
        dup = true;
        break;
      }
    if (!dup) kept.push_back(std::move(p));
  }
  std::sort(kept.begin(), kept.end(), [](const CriticalPoint& a, const CriticalPoint& b) {
    return a.energy_per_site < b.energy_per_site;
  });
  return kept;
}

/**
 * Multi-start search for critical points on the sphere of radius q sqrt(N).
 * Result is sorted by energy; starts are a pure function of `seed`.
 */
inline std::vector<CriticalPoint> find_q_critical(const HamiltonianInstance& h, double q, const SearchOptions& opt,
                                                  std::uint64_t seed) {
  if (!(q > 0.0 && q <= 1.0)) throw DomainError("radius q must lie in (0,1]");
  const int starts = opt.n_starts > 0 ? opt.n_starts : 50 * h.n();
  std::vector<std::optional<CriticalPoint>> found(starts);
  parallel_for(starts, [&](std::size_t s) {
    Eigen::VectorXd x = q * sphere_point(h.n(), rng::stream_key(seed, 0x5741, s));
    if (converge_critical(h, x, opt)) found[s] = describe_point(h, x);
  });
  std::vector<CriticalPoint> pts;
  for (auto& f : found)
    if (f) pts.push_back(std::move(*f));
  return deduplicate(std::move(pts));
}

inline std::vector<CriticalPoint> find_q_critical(const HamiltonianInstance& h, double q, int n_starts, double tol,
                                                  std::uint64_t seed = 0) {
  SearchOptions opt;
  opt.n_starts = n_starts;
  opt.tol = tol;
  return find_q_critical(h, q, opt, seed);
}

enum class PathStatus { complete, ill_conditioned, newton_failed };

inline std::string to_string(PathStatus s) {
  switch (s) {
    case PathStatus::complete: return "complete";
    case PathStatus::ill_conditioned: return "ill_conditioned";
    case PathStatus::newton_failed: return "newton_failed";
  }
  return "unknown";
}

struct CriticalPath {
  std::vector<CriticalPoint> points;
  PathStatus status = PathStatus::complete;
  /// max over steps of |sigma_{k+1} - sigma_k| / (sqrt(N) dq)
  double max_speed = 0.0;
};

/**
 * Follows a local minimum found at q = 1 down to q_min by radial rescaling
 * and Newton correction on each sphere.
 */
inline CriticalPath track_critical_path(const HamiltonianInstance& h, const CriticalPoint& start, double q_min,
                                        double step = 1e-3, double tol = 1e-9) {
  if (!(q_min > 0.0 && q_min < 1.0)) throw DomainError("q_min must lie in (0,1)");
  if (start.index != 0) throw PreconditionError("path tracking starts from a local minimum");
  CriticalPath path;
  path.points.push_back(start);
  const double sqn = std::sqrt(static_cast<double>(h.n()));
  Eigen::VectorXd x = start.sigma;
  double q = start.q;
  while (q > q_min + 1e-12) {
    double qn = std::max(q - step, q_min);
    Eigen::VectorXd y = x * (qn / q);
    bool ok = false;
    for (int it = 0; it < 30; ++it) {
      auto sd = spherical_derivatives(h, y);
      if (sd.gradient.norm() <= tol * sqn) {
        ok = true;
        break;
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sd.hessian);
      auto lam = es.eigenvalues().cwiseAbs();
      if (lam.maxCoeff() > 1e10 * lam.minCoeff()) {
        path.status = PathStatus::ill_conditioned;
        return path;
      }
      Eigen::VectorXd d = -(es.eigenvectors() *
                            ((es.eigenvectors().transpose() * sd.gradient).array() / es.eigenvalues().array()).matrix());
      y = detail::retract(y, sd.frame * d, qn * sqn);
    }
    if (!ok) {
      path.status = PathStatus::newton_failed;
      return path;
    }
    path.max_speed = std::max(path.max_speed, (y - x).norm() / (sqn * (q - qn)));
    x = y;
    q = qn;
    path.points.push_back(describe_point(h, x));
  }
  return path;
}

}  // namespace glasscape
