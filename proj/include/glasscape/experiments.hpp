#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "glasscape/complexity.hpp"
#include "glasscape/critical.hpp"
#include "glasscape/errors.hpp"
#include "glasscape/hamiltonian.hpp"
#include "glasscape/mixture.hpp"
#include "glasscape/parallel.hpp"
#include "glasscape/semicircle.hpp"
#include "glasscape/thermo.hpp"

namespace glasscape {

namespace stats {

/// Neumaier summation, in index order.
inline double sum(const std::vector<double>& v) {
  double s = 0.0, c = 0.0;
  for (double x : v) {
    double t = s + x;
    c += std::abs(s) >= std::abs(x) ? (s - t) + x : (x - t) + s;
    s = t;
  }
  return s + c;
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

inline MeanSe mean_se(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  MeanSe r;
  r.mean = sum(v) / n;
  std::vector<double> sq(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - r.mean) * (v[i] - r.mean);
  r.se = v.size() > 1 ? std::sqrt(sum(sq) / (n - 1.0) / n) : std::numeric_limits<double>::infinity();
  return r;
}

}  // namespace stats

/// Two probe points of norm sqrt(N) with overlap exactly r.
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> probe_pair(int n, double r, std::uint64_t key) {
  Eigen::VectorXd a = sphere_point(n, rng::stream_key(key, 1));
  Eigen::VectorXd b = sphere_point(n, rng::stream_key(key, 2));
  b -= (a.dot(b) / a.squaredNorm()) * a;
  b *= std::sqrt(static_cast<double>(n)) / b.norm();
  return {a, r * a + std::sqrt(std::max(0.0, 1.0 - r * r)) * b};
}

struct CovarianceProbe {
  double overlap = 0.0;
  double target = 0.0;  ///< nu(R)
  double mean = 0.0;    ///< mean of H(s)H(s')/N over replicas
  double se = 0.0;
  double z = 0.0;
};

/// Empirical E[H(s)H(s')]/N against nu(R) at fixed probe pairs.
inline std::vector<CovarianceProbe> covariance_law_check(const Mixture& m, int n, const std::vector<double>& overlaps,
                                                         int replicas, std::uint64_t seed) {
  if (replicas < 2) throw UsageError("need at least two replicas");
  std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> probes;
  for (std::size_t k = 0; k < overlaps.size(); ++k)
    probes.push_back(probe_pair(n, overlaps[k], rng::stream_key(seed, 0x9b0e, k)));
  std::vector<std::vector<double>> prod(overlaps.size(), std::vector<double>(replicas));
  parallel_for(static_cast<std::size_t>(replicas), [&](std::size_t rep) {
    HamiltonianInstance h(m, n, rng::stream_key(seed, 0x4a11, rep), TensorForms::raw);
    for (std::size_t k = 0; k < probes.size(); ++k)
      prod[k][rep] = h.energy(probes[k].first) * h.energy(probes[k].second) / n;
  });
  std::vector<CovarianceProbe> out;
  for (std::size_t k = 0; k < overlaps.size(); ++k) {
    auto ms = stats::mean_se(prod[k]);
    CovarianceProbe c;
    c.overlap = overlaps[k];
    c.target = m(overlaps[k]);
    c.mean = ms.mean;
    c.se = ms.se;
    c.z = (ms.mean - c.target) / ms.se;
    out.push_back(c);
  }
  return out;
}

struct BandConditioningResult {
  double empirical_variance = 0.0;
  double se = 0.0;
  double predicted = 0.0;  ///< N sum_{k>=2} alpha_k^2(q)
  double z = 0.0;
};

/**
 * Regresses H at a band point of q n on H(q n) and the tangent derivative
 * along the band direction; the residual variance is compared to the
 * band weight of the k >= 2 components.
 */
inline BandConditioningResult band_conditioning_check(const Mixture& m, int n, double q, int replicas,
                                                      std::uint64_t seed) {
  detail::check_open_radius(q);
  if (replicas < 2) throw UsageError("need at least two replicas");
  const double dn = n, s = q * q;
  auto [nhat, tau] = probe_pair(n, 0.0, rng::stream_key(seed, 0xba4d));
  nhat /= std::sqrt(dn);
  tau /= std::sqrt(dn);
  Eigen::VectorXd center = q * std::sqrt(dn) * nhat;
  Eigen::VectorXd band = std::sqrt(dn) * (q * nhat + std::sqrt(1.0 - s) * tau);
  // regression coefficients from the covariance kernel N nu(<x,y>/N)
  const double c_energy = 1.0;
  const double c_slope = std::sqrt(dn * (1.0 - s));
  std::vector<double> res2(replicas);
  parallel_for(static_cast<std::size_t>(replicas), [&](std::size_t rep) {
    HamiltonianInstance h(m, n, rng::stream_key(seed, 0xc0de, rep));
    auto ev = h.evaluate(center, 1);
    double r = h.energy(band) - c_energy * ev.energy - c_slope * ev.gradient.dot(tau);
    res2[rep] = r * r;
  });
  auto ms = stats::mean_se(res2);
  BandConditioningResult out;
  out.empirical_variance = ms.mean;
  out.se = ms.se;
  out.predicted = dn * (m(1.0) - m(s) - (1.0 - s) * m(s, 1));
  out.z = (out.empirical_variance - out.predicted) / out.se;
  return out;
}

struct GoeResult {
  double x = 0.0;
  double mean_log_det_per_n = 0.0;
  double se = 0.0;
  double omega_x = 0.0;
};

/// GOE with off-diagonal variance 1/n and diagonal variance 2/n; one spectrum per replica serves every x.
inline std::vector<GoeResult> goe_check(int n_matrix, const std::vector<double>& xs, int replicas, std::uint64_t seed) {
  for (double x : xs)
    if (!(std::abs(x) > 2.1)) throw PreconditionError("goe_check needs |x| > 2.1");
  if (n_matrix < 2 || replicas < 2) throw UsageError("goe_check needs n >= 2 and replicas >= 2");
  std::vector<std::vector<double>> vals(xs.size(), std::vector<double>(replicas));
  parallel_for(static_cast<std::size_t>(replicas), [&](std::size_t rep) {
    const std::uint64_t key = rng::stream_key(seed, 0x6e0e, rep);
    Eigen::MatrixXd a(n_matrix, n_matrix);
    std::uint64_t c = 0;
    const double sd = 1.0 / std::sqrt(static_cast<double>(n_matrix));
    for (int j = 0; j < n_matrix; ++j)
      for (int i = 0; i <= j; ++i) {
        double g = rng::gaussian(key, c++) * sd;
        a(i, j) = a(j, i) = i == j ? std::numbers::sqrt2 * g : g;
      }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
    for (std::size_t k = 0; k < xs.size(); ++k)
      vals[k][rep] = (es.eigenvalues().array() - xs[k]).abs().log().sum() / n_matrix;
  });
  std::vector<GoeResult> out;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    auto ms = stats::mean_se(vals[k]);
    out.push_back({xs[k], ms.mean, ms.se, omega(xs[k])});
  }
  return out;
}

inline GoeResult goe_check(int n_matrix, double x, int replicas, std::uint64_t seed) {
  return goe_check(n_matrix, std::vector<double>{x}, replicas, seed).front();
}

struct Interval {
  double lo = 0.0, hi = 0.0;
  bool contains(double v) const { return v >= lo && v <= hi; }
};

/// Critical points of independent replicas; replica i uses instance seed stream_key(seed, i).
struct ReplicaSet {
  Mixture mixture;
  int n = 0;
  double q = 1.0;
  std::vector<std::vector<CriticalPoint>> points;
};

inline ReplicaSet collect_critical_points(const Mixture& m, int n, double q, int replicas, const SearchOptions& opt,
                                          std::uint64_t seed) {
  if (replicas < 1) throw UsageError("need at least one replica");
  ReplicaSet rs{m, n, q, std::vector<std::vector<CriticalPoint>>(replicas)};
  for (int rep = 0; rep < replicas; ++rep) {
    HamiltonianInstance h(m, n, rng::stream_key(seed, 0x7e91, rep));
    rs.points[rep] = find_q_critical(h, q, opt, rng::stream_key(seed, 0x57a7, rep));
  }
  return rs;
}

struct WindowCount {
  std::vector<int> counts;
  double mean_count = 0.0;
  /// (1/N) log of the mean count; -inf when nothing was found.
  double log_mean_count_per_n = 0.0;
  double zero_fraction = 0.0;
};

inline WindowCount count_in_window(const ReplicaSet& rs, Interval energy, Interval radial) {
  WindowCount w;
  for (const auto& pts : rs.points) {
    int c = 0;
    for (const auto& p : pts)
      if (energy.contains(p.energy_per_site) && radial.contains(p.radial_per_sqrt)) ++c;
    w.counts.push_back(c);
  }
  std::vector<double> d(w.counts.begin(), w.counts.end());
  w.mean_count = stats::sum(d) / static_cast<double>(d.size());
  w.log_mean_count_per_n = std::log(w.mean_count) / rs.n;
  w.zero_fraction = static_cast<double>(std::count(w.counts.begin(), w.counts.end(), 0)) / w.counts.size();
  return w;
}

struct CrtCountResult {
  WindowCount window;
  double log_mean_count_per_n = 0.0;
  double theta_sup = 0.0;
};

/// Empirical first moment in the box B x D against sup of the complexity over the box.
inline CrtCountResult crt_count_experiment(const ReplicaSet& rs, Interval energy, Interval radial) {
  CrtCountResult r;
  r.window = count_in_window(rs, energy, radial);
  r.log_mean_count_per_n = r.window.log_mean_count_per_n;
  r.theta_sup = sup_theta_box(ComplexitySurface(rs.mixture, rs.q), energy.lo, energy.hi, radial.lo, radial.hi);
  return r;
}

inline CrtCountResult crt_count_experiment(const Mixture& m, int n, double q, Interval energy, Interval radial,
                                           int replicas, std::uint64_t seed, const SearchOptions& opt = {}) {
  return crt_count_experiment(collect_critical_points(m, n, q, replicas, opt, seed), energy, radial);
}

/// Per-replica lowest critical energy.
inline std::vector<double> lowest_energies(const ReplicaSet& rs) {
  std::vector<double> out;
  for (const auto& pts : rs.points)
    out.push_back(pts.empty() ? std::numeric_limits<double>::quiet_NaN() : pts.front().energy_per_site);
  return out;
}

}  // namespace glasscape
