#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "glasscape/critical.hpp"
#include "glasscape/errors.hpp"
#include "glasscape/experiments.hpp"
#include "glasscape/hamiltonian.hpp"
#include "glasscape/parallel.hpp"
#include "glasscape/thermo.hpp"

namespace glasscape {

struct SamplerOptions {
  int ladder = 8;             ///< tempering rungs, geometric from beta/8 to beta
  int moves_per_sweep = 1;    ///< great-circle proposals per rung per sweep
  double burn_in_fraction = 0.5;
  int snapshots = 40;         ///< recorded target-rung states per chain after burn-in
  double target_acceptance = 0.3;
  double non_mixing_threshold = 0.01;
};

struct ChainDiagnostics {
  double acceptance = 0.0;       ///< target rung, after burn-in
  double swap_acceptance = 0.0;
  double step_angle = 0.0;       ///< target rung
  bool non_mixing = false;
};

struct ChainTrace {
  std::vector<Eigen::VectorXd> samples;
  std::vector<double> energies_per_site;
  ChainDiagnostics diagnostics;
};

inline std::vector<double> tempering_ladder(double beta, int rungs) {
  if (rungs == 1) return {beta};
  std::vector<double> b(rungs);
  for (int k = 0; k < rungs; ++k) b[k] = beta / 8.0 * std::pow(8.0, static_cast<double>(k) / (rungs - 1));
  return b;
}

/**
 * One parallel-tempering Metropolis chain on the sphere of radius sqrt(N).
 * Step angles adapt during burn-in only.
 */
inline ChainTrace run_tempering_chain(const HamiltonianInstance& h, double beta, int sweeps, std::uint64_t key,
                                      const SamplerOptions& opt = {}) {
  if (!(beta > 0.0)) throw DomainError("beta must be positive");
  if (sweeps < 2 || opt.ladder < 1 || opt.snapshots < 1) throw UsageError("sampler needs sweeps >= 2, ladder >= 1 and snapshots >= 1");
  const int n = h.n(), rungs = opt.ladder;
  const double rho = std::sqrt(static_cast<double>(n));
  const auto betas = tempering_ladder(beta, rungs);
  std::vector<Eigen::VectorXd> x(rungs);
  std::vector<double> e(rungs), angle(rungs, 0.5);
  std::vector<int> batch_acc(rungs, 0), batch_tries(rungs, 0);
  for (int k = 0; k < rungs; ++k) {
    x[k] = sphere_point(n, rng::stream_key(key, 0x1417, k));
    e[k] = h.energy(x[k]);
  }
  std::uint64_t counter = 0;
  auto uniform = [&] { return rng::uniform_open(key, counter++); };
  auto normal = [&] { return rng::gaussian(key ^ 0x5bd1e995ULL, counter++); };
  const int burn = std::clamp(static_cast<int>(opt.burn_in_fraction * sweeps), 1, sweeps - 1);
  const int stride = std::max(1, (sweeps - burn) / opt.snapshots);
  long acc = 0, tries = 0, swap_acc = 0, swap_tries = 0;
  ChainTrace trace;
  Eigen::VectorXd v(n);
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    const bool burning = sweep < burn;
    for (int k = 0; k < rungs; ++k)
      for (int mv = 0; mv < opt.moves_per_sweep; ++mv) {
        for (int i = 0; i < n; ++i) v[i] = normal();
        v -= (v.dot(x[k]) / (rho * rho)) * x[k];
        v *= rho / v.norm();
        Eigen::VectorXd y = std::cos(angle[k]) * x[k] + std::sin(angle[k]) * v;
        y *= rho / y.norm();
        double ey = h.energy(y);
        bool ok = ey <= e[k] || uniform() < std::exp(-betas[k] * (ey - e[k]));
        if (ok) {
          x[k] = std::move(y);
          e[k] = ey;
        }
        if (burning) {
          batch_acc[k] += ok;
          if (++batch_tries[k] == 50) {
            double rate = batch_acc[k] / 50.0;
            angle[k] = std::clamp(angle[k] * std::exp(2.0 * (rate - opt.target_acceptance)), 1e-4,
                                  0.5 * std::numbers::pi);
            batch_acc[k] = batch_tries[k] = 0;
          }
        } else if (k == rungs - 1) {
          acc += ok;
          ++tries;
        }
      }
    for (int k = sweep % 2; k + 1 < rungs; k += 2) {
      double a = (betas[k + 1] - betas[k]) * (e[k + 1] - e[k]);
      bool ok = a >= 0.0 || uniform() < std::exp(a);
      if (ok) {
        std::swap(x[k], x[k + 1]);
        std::swap(e[k], e[k + 1]);
      }
      if (!burning) {
        swap_acc += ok;
        ++swap_tries;
      }
    }
    if (!burning && (sweep - burn + 1) % stride == 0 &&
        static_cast<int>(trace.samples.size()) < opt.snapshots) {
      trace.samples.push_back(x[rungs - 1]);
      trace.energies_per_site.push_back(e[rungs - 1] / n);
    }
  }
  auto& d = trace.diagnostics;
  d.acceptance = tries ? static_cast<double>(acc) / tries : 0.0;
  d.swap_acceptance = swap_tries ? static_cast<double>(swap_acc) / swap_tries : 0.0;
  d.step_angle = angle[rungs - 1];
  d.non_mixing = d.acceptance < opt.non_mixing_threshold;
  return trace;
}

struct OverlapHistogram {
  std::vector<double> bin_edges;
  std::vector<long> counts;
  long n_pairs = 0;
  double q_star_sq = 0.0;
  /// fractions with |R| < window, |R - q*^2| < window and |R + q*^2| < window
  double mass_zero = 0.0, mass_plus = 0.0, mass_minus = 0.0;
  double window = 0.15;

  OverlapHistogram() = default;
  OverlapHistogram(int bins, double q_star_sq_, double window_) : q_star_sq(q_star_sq_), window(window_) {
    for (int i = 0; i <= bins; ++i) bin_edges.push_back(-1.0 + 2.0 * i / bins);
    counts.assign(bins, 0);
  }

  void add(double r) {
    int bins = static_cast<int>(counts.size());
    int b = std::clamp(static_cast<int>(std::floor((r + 1.0) / 2.0 * bins)), 0, bins - 1);
    ++counts[b];
    values_.push_back(r);
    ++n_pairs;
  }

  /// Fraction of pairs with |R - target| < w.
  double mass_near(double target, double w) const {
    if (values_.empty()) return 0.0;
    long c = std::count_if(values_.begin(), values_.end(), [&](double r) { return std::abs(r - target) < w; });
    return static_cast<double>(c) / values_.size();
  }

  void finalize() {
    mass_zero = mass_near(0.0, window);
    mass_plus = mass_near(q_star_sq, window);
    mass_minus = mass_near(-q_star_sq, window);
  }

  const std::vector<double>& values() const { return values_; }

 private:
  std::vector<double> values_;
};

/// Binomial standard error of a mass estimate and its z-score against a threshold.
struct MassCheck {
  double mass = 0.0;
  double threshold = 0.0;
  double se = 0.0;
  double z = 0.0;
  bool passed = false;
};

inline MassCheck mass_check(double mass, long n, double threshold) {
  MassCheck c;
  c.mass = mass;
  c.threshold = threshold;
  c.se = n > 0 ? std::sqrt(std::max(mass * (1.0 - mass), 1.0 / n) / n) : 0.0;
  c.z = c.se > 0.0 ? (mass - threshold) / c.se : 0.0;
  c.passed = n > 0 && mass >= threshold;
  return c;
}

struct GibbsResult {
  double beta = 0.0;
  double q_star = 0.0, e_star = 0.0;
  OverlapHistogram all, same_band, cross_band;
  double band_mass = 0.0;
  /// same as band_mass without the condition on the center energy
  double band_mass_any_depth = 0.0;
  int distinct_bands = 0;
  std::vector<ChainDiagnostics> diagnostics;
  bool non_mixing = false;
};

struct GibbsOptions {
  SamplerOptions sampler;
  double band_epsilon = 0.1;
  double mass_window = 0.15;
  int bins = 40;
};

namespace detail {

inline std::vector<ChainTrace> run_chains(const HamiltonianInstance& h, double beta, int chains, int sweeps,
                                          std::uint64_t seed, const SamplerOptions& opt) {
  if (chains < 2) throw UsageError("need at least two chains");
  std::vector<ChainTrace> traces(chains);
  parallel_for(static_cast<std::size_t>(chains), [&](std::size_t c) {
    traces[c] = run_tempering_chain(h, beta, sweeps, rng::stream_key(seed, 0xc4a1, c), opt);
  });
  return traces;
}

}  // namespace detail

/**
 * Samples the Gibbs measure with independent tempering chains, assigns every
 * snapshot to the q*-critical point reached by descent from q* times the
 * snapshot, and splits pair overlaps by whether the two centers coincide.
 */
inline GibbsResult gibbs_experiment(const HamiltonianInstance& h, double beta, int chains, int sweeps,
                                    std::uint64_t seed, const GibbsOptions& opt = {}) {
  GibbsResult res;
  res.beta = beta;
  auto qs = q_star(h.mixture(), beta);
  res.q_star = qs.q_star;
  res.e_star = ground_state_solution(h.mixture(), res.q_star).e0;
  const double qq = res.q_star * res.q_star;
  res.all = OverlapHistogram(opt.bins, qq, opt.mass_window);
  res.same_band = res.all;
  res.cross_band = res.all;

  auto traces = detail::run_chains(h, beta, chains, sweeps, seed, opt.sampler);
  const std::size_t snaps = traces.front().samples.size();

  // band centers
  SearchOptions so;
  so.mode = SearchMode::minima;
  std::vector<std::vector<CriticalPoint>> center(chains, std::vector<CriticalPoint>(snaps));
  std::vector<std::vector<char>> converged(chains, std::vector<char>(snaps, 0));
  parallel_for(static_cast<std::size_t>(chains) * snaps, [&](std::size_t idx) {
    std::size_t c = idx / snaps, t = idx % snaps;
    Eigen::VectorXd x = res.q_star * traces[c].samples[t];
    converged[c][t] = converge_critical(h, x, so);
    center[c][t] = describe_point(h, x);
  });
  std::vector<Eigen::VectorXd> distinct;
  std::vector<std::vector<int>> label(chains, std::vector<int>(snaps, -1));
  long in_band = 0, near_center = 0, total = 0;
  for (int c = 0; c < chains; ++c)
    for (std::size_t t = 0; t < snaps; ++t) {
      const auto& cp = center[c][t];
      int id = -1;
      for (std::size_t k = 0; k < distinct.size(); ++k)
        if (overlap(distinct[k], cp.sigma) > 1.0 - 1e-6) id = static_cast<int>(k);
      if (id < 0) {
        id = static_cast<int>(distinct.size());
        distinct.push_back(cp.sigma);
      }
      label[c][t] = id;
      ++total;
      if (!converged[c][t] || std::abs(overlap(traces[c].samples[t], cp.sigma) - res.q_star) > opt.band_epsilon) continue;
      ++near_center;
      if (std::abs(cp.energy_per_site + res.e_star) <= opt.band_epsilon) ++in_band;
    }
  res.distinct_bands = static_cast<int>(distinct.size());
  res.band_mass = total ? static_cast<double>(in_band) / total : 0.0;
  res.band_mass_any_depth = total ? static_cast<double>(near_center) / total : 0.0;

  for (std::size_t t = 0; t < snaps; ++t)
    for (int a = 0; a < chains; ++a)
      for (int b = a + 1; b < chains; ++b) {
        double r = overlap(traces[a].samples[t], traces[b].samples[t]);
        res.all.add(r);
        (label[a][t] == label[b][t] ? res.same_band : res.cross_band).add(r);
      }
  res.all.finalize();
  res.same_band.finalize();
  res.cross_band.finalize();
  for (const auto& tr : traces) {
    res.diagnostics.push_back(tr.diagnostics);
    res.non_mixing = res.non_mixing || tr.diagnostics.non_mixing;
  }
  return res;
}

struct ChaosResult {
  double beta1 = 0.0, beta2 = 0.0;
  OverlapHistogram cross;
  double mass_zero = 0.0;  ///< fraction with |R| < 0.2
  std::vector<ChainDiagnostics> diagnostics;
  bool non_mixing = false;
};

/// Overlaps between snapshots of chains run at two different temperatures.
inline ChaosResult chaos_experiment(const HamiltonianInstance& h, double beta1, double beta2, int chains, int sweeps,
                                    std::uint64_t seed, const GibbsOptions& opt = {}) {
  if (beta1 == beta2) throw PreconditionError("chaos experiment needs two different temperatures");
  if (!(beta1 > 0.0 && beta2 > 0.0)) throw DomainError("beta must be positive");
  ChaosResult res;
  res.beta1 = beta1;
  res.beta2 = beta2;
  double qq = 0.0;
  try {
    qq = q_star(h.mixture(), beta1).q_star * q_star(h.mixture(), beta2).q_star;
  } catch (const Error&) {
  }
  res.cross = OverlapHistogram(opt.bins, qq, opt.mass_window);
  auto t1 = detail::run_chains(h, beta1, chains, sweeps, rng::stream_key(seed, 1), opt.sampler);
  auto t2 = detail::run_chains(h, beta2, chains, sweeps, rng::stream_key(seed, 2), opt.sampler);
  const std::size_t snaps = std::min(t1.front().samples.size(), t2.front().samples.size());
  for (std::size_t t = 0; t < snaps; ++t)
    for (int a = 0; a < chains; ++a)
      for (int b = 0; b < chains; ++b) res.cross.add(overlap(t1[a].samples[t], t2[b].samples[t]));
  res.cross.finalize();
  res.mass_zero = res.cross.mass_near(0.0, 0.2);
  for (const auto* tr : {&t1, &t2})
    for (const auto& c : *tr) {
      res.diagnostics.push_back(c.diagnostics);
      res.non_mixing = res.non_mixing || c.diagnostics.non_mixing;
    }
  return res;
}

/// 1/(sqrt 2 max_q alpha_2(q)): below it no band radius carries a two-spin transition.
inline double beta_reference(const Mixture& m) {
  auto r = detail::grid_then_brent([&](double q) { return alpha_k(m, q, 2); }, 1e-6, 1.0 - 1e-6, 256);
  return 1.0 / (std::numbers::sqrt2 * r.value);
}

}  // namespace glasscape
