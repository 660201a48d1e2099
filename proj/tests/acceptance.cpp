// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <boost/math/special_functions/binomial.hpp>

#include "glasscape/glasscape.hpp"
#include "oracles.hpp"

using namespace glasscape;

namespace {

const Mixture near_pure3 = Mixture::from_terms({{3, 0.96}, {4, 0.04}});
const Mixture even42 = Mixture::from_terms({{4, 0.9}, {2, 0.1}});
const Mixture pure3 = Mixture::from_terms({{3, 1.0}});

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

struct Criterion {
  int id;
  std::string name;
  double budget_seconds;
  std::function<Outcome()> run;
};

Outcome omega_oracle() {
  double worst = 0.0;
  for (int i = 0; i < 97; ++i) {
    double x = -4.0 + 8.0 * i / 96.0;
    worst = std::max(worst, std::abs(omega(x) - oracle::omega_quadrature(x)));
  }
  return {worst <= 1e-8, fmt("max |omega - quadrature| = %.3g over 97 points", worst)};
}

Outcome psi_decomposition() {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> uc(0.05, 1.0), uq(0.5, 1.0), uu(0.5, 1.05), ux(0.5, 1.2);
  std::uniform_int_distribution<int> up(2, 6);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    std::map<int, double> terms{{3, uc(rng)}};
    while (terms.size() < 2) terms[up(rng)] += uc(rng);
    auto m = Mixture::from_terms(terms);
    double q1 = uq(rng), q2 = uq(rng);
    auto g1 = ground_state_solution(m, q1), g2 = ground_state_solution(m, q2);
    double u1 = -g1.e0 * uu(rng), u2 = -g2.e0 * uu(rng), x1 = -g1.x0 * ux(rng), x2 = -g2.x0 * ux(rng);
    double joint = psi(m, q1, q2, 0.0, u1, u2, x1, x2);
    double split = theta(m, q1, u1, x1) + theta(m, q2, u2, x2);
    worst = std::max(worst, std::abs(joint - split));
  }
  return {worst <= 1e-10, fmt("max |psi(0) - theta1 - theta2| = %.3g over 100 draws", worst)};
}

Outcome sigma_ux_definite() {
  double worst = std::numeric_limits<double>::infinity();
  int cases = 0;
  for (int k = -19; k <= 19; ++k)
    for (double q1 : {0.8, 0.9, 1.0})
      for (double q2 : {0.8, 0.9, 1.0}) {
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(sigma_UX(near_pure3, 0.05 * k, q1, q2));
        worst = std::min(worst, es.eigenvalues()(0));
        ++cases;
      }
  return {worst > 0.0, fmt("min eigenvalue %.4g over %d cases", worst, cases)};
}

Outcome condition_m() {
  std::string detail;
  bool ok = true;
  for (auto [name, m] : {std::pair{"near_pure3", &near_pure3}, std::pair{"even42", &even42}}) {
    auto t0 = std::chrono::steady_clock::now();
    auto v = check_condition_m(*m);
    double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    ok = ok && v.holds && v.d2_psi0_at_zero < 0.0 && v.max_margin > 0.0 && dt < 30.0;
    detail += fmt("%s holds=%d d2=%.4g margin=%.3g (%.1fs); ", name, v.holds, v.d2_psi0_at_zero, v.max_margin, dt);
  }
  auto p = check_condition_m(pure3);
  bool pure_ok = !p.holds && p.failed_clause == CondMClause::not_mixed;
  detail += fmt("pure3 clause=%s", p.failed_clause ? to_string(*p.failed_clause).c_str() : "none");
  return {ok && pure_ok, detail};
}

Outcome e0_derivative() {
  double worst = 0.0;
  const double h = 1e-4;
  for (double q : {0.97, 0.98, 0.99}) {
    double fd = (ground_state_solution(near_pure3, q + h).e0 - ground_state_solution(near_pure3, q - h).e0) / (2 * h);
    worst = std::max(worst, std::abs(fd - ground_state_solution(near_pure3, q).x0));
  }
  return {worst <= 1e-4, fmt("max |FD(E0) - x0| = %.3g", worst)};
}

Outcome phase_asymptotics() {
  auto g = ground_state_solution(near_pure3, 1.0);
  const double tc = t_c(near_pure3), tm = t_roots(near_pure3, g.x0).t_minus;
  double prev_c = 1e9, prev_s = 1e9, last_c = 0, last_s = 0;
  bool ok = true;
  std::string detail;
  for (double b : {20.0, 40.0, 80.0}) {
    auto s = phase_summary(near_pure3, b);
    double ec = std::abs(b * (1 - s.q_c) - tc), es = std::abs(b * (1 - s.q_star) - tm);
    ok = ok && ec < prev_c && es < prev_s && s.q_star_star < s.q_c && s.q_c < s.q_star;
    prev_c = last_c = ec;
    prev_s = last_s = es;
    detail += fmt("beta=%g: %.4g %.4g; ", b, ec, es);
  }
  ok = ok && last_c <= 0.05 * tc && last_s <= 0.1 * tm;
  detail += fmt("bounds %.4g %.4g", 0.05 * tc, 0.1 * tm);
  return {ok, detail};
}

Outcome gap_check() {
  bool ok = true;
  std::string detail;
  for (auto [name, m] : {std::pair{"near_pure3", &near_pure3}, std::pair{"even42", &even42}}) {
    auto gp = gap(*m, 160.0);
    ok = ok && gp.limit > 0.0 && std::abs(gp.finite - gp.limit) <= 0.15 * gp.limit;
    detail += fmt("%s limit=%.6g finite(160)=%.6g; ", name, gp.limit, gp.finite);
  }
  return {ok, detail};
}

Outcome lambda_consistency() {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> ub(5.0, 200.0), ue(-2.0, 0.0), uq(0.5, 0.99);
  double worst_z = 0.0, worst_f = 0.0;
  for (int i = 0; i < 200; ++i) {
    double b = ub(rng), e = ue(rng), q = uq(rng);
    double z1 = lambda_Z(near_pure3, b, e, q), z2 = lambda_Z_series(near_pure3, b, e, q);
    worst_z = std::max(worst_z, std::abs(z1 - z2) / std::max(1.0, std::abs(z1)));
    if (b * alpha_k(near_pure3, q, 2) < 1 / std::numbers::sqrt2) continue;
    double f1 = lambda_F_2minus(near_pure3, b, e, q), f2 = lambda_F_2minus_expanded(near_pure3, b, e, q);
    worst_f = std::max(worst_f, std::abs(f1 - f2) / std::max(1.0, std::abs(f1)));
  }
  std::vector<double> cs;
  for (double b : {20.0, 40.0, 80.0}) {
    double qc = q_c(near_pure3, b);
    double e = -ground_state_solution(near_pure3, qc).e0;
    cs.push_back(b * std::abs(lambda_F_2minus(near_pure3, b, e, qc) - lambda_Z(near_pure3, b, e, qc)));
  }
  double spread = (*std::max_element(cs.begin(), cs.end()) - *std::min_element(cs.begin(), cs.end())) / cs.back();
  bool ok = worst_z <= 1e-12 && worst_f <= 1e-12 && spread <= 0.1;
  return {ok, fmt("line gaps %.3g %.3g; beta*|diff| = %.5g %.5g %.5g (spread %.3g)", worst_z, worst_f, cs[0], cs[1],
                  cs[2], spread)};
}

Outcome alpha_identity() {
  double worst = 0.0;
  for (double q : {0.1, 0.3, 0.5, 0.7, 0.9})
    for (double rho : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
      double s = 0.0;
      for (int k = 0; k <= near_pure3.max_degree(); ++k) s += std::pow(alpha_k(near_pure3, q, k), 2) * std::pow(rho, k);
      worst = std::max(worst, std::abs(s - near_pure3(q * q + (1 - q * q) * rho)));
    }
  return {worst <= 1e-12, fmt("max identity gap %.3g on 25 points", worst)};
}

Outcome goe() {
  auto r = goe_check(200, {3.0, -3.0}, 100, 10);
  double e1 = std::abs(r[0].mean_log_det_per_n - r[0].omega_x), e2 = std::abs(r[1].mean_log_det_per_n - r[1].omega_x);
  return {e1 <= 0.05 && e2 <= 0.05,
          fmt("x=3: %.5f vs %.5f; x=-3: %.5f vs %.5f", r[0].mean_log_det_per_n, r[0].omega_x, r[1].mean_log_det_per_n,
              r[1].omega_x)};
}

Outcome covariance_law() {
  auto probes = covariance_law_check(near_pure3, 32, {-0.5, 0.0, 0.5, 0.9}, 500, 11);
  bool ok = true;
  std::string detail;
  for (const auto& p : probes) {
    ok = ok && std::abs(p.z) <= 3.0;
    detail += fmt("R=%g z=%.2f; ", p.overlap, p.z);
  }
  return {ok, detail};
}

/// Shared by the ground state and first-moment criteria.
const ReplicaSet& replicas_at(int n) {
  static std::map<int, ReplicaSet> cache;
  auto it = cache.find(n);
  if (it == cache.end()) {
    SearchOptions opt;
    opt.n_starts = 100;
    it = cache.emplace(n, collect_critical_points(near_pure3, n, 1.0, 50, opt, 12)).first;
  }
  return it->second;
}

Outcome ground_state() {
  const double e0 = ground_state_solution(near_pure3, 1.0).e0;
  std::vector<double> disc;
  std::string detail;
  for (int n : {16, 24, 32}) {
    auto ms = stats::mean_se(lowest_energies(replicas_at(n)));
    disc.push_back(std::abs(ms.mean + e0));
    detail += fmt("N=%d mean min %.4f (se %.4f) disc %.4f; ", n, ms.mean, ms.se, disc.back());
  }
  bool ok = disc[2] <= 0.1 && disc[1] <= disc[0] && disc[2] <= disc[1];
  return {ok, detail};
}

Outcome kac_rice() {
  auto g = ground_state_solution(near_pure3, 1.0);
  const auto& rs = replicas_at(32);
  auto near = crt_count_experiment(rs, {-g.e0 - 0.05, -g.e0 + 0.05}, {-g.x0 - 0.05, -g.x0 + 0.05});
  auto deep = crt_count_experiment(rs, {-g.e0 - 0.5, -g.e0 - 0.3}, {-g.x0 - 1.0, -g.x0 + 1.0});
  bool ok = std::abs(near.log_mean_count_per_n - near.theta_sup) <= 0.2 && deep.theta_sup < -0.2 &&
            deep.window.zero_fraction >= 0.9;
  return {ok, fmt("window: empirical %.4f vs sup %.4f (mean count %.3f); deep window sup %.3f, zero in %.0f%%",
                  near.log_mean_count_per_n, near.theta_sup, near.window.mean_count, deep.theta_sup,
                  100 * deep.window.zero_fraction)};
}

Outcome rsb_and_chaos() {
  const double ref = beta_reference(near_pure3);
  HamiltonianInstance h(near_pure3, 32, 14);
  GibbsOptions opt;
  auto g = gibbs_experiment(h, 4 * ref, 16, 10000, 14, opt);
  auto purity = mass_check(g.same_band.mass_plus, g.same_band.n_pairs, 0.8);
  auto orth = mass_check(g.cross_band.mass_zero, g.cross_band.n_pairs, 0.8);
  auto c = chaos_experiment(h, 4 * ref, 8 * ref, 8, 10000, 15, opt);
  auto chaos = mass_check(c.mass_zero, c.cross.n_pairs, 0.7);
  HamiltonianInstance hp(pure3, 32, 14);
  auto cp = chaos_experiment(hp, 4 * ref, 8 * ref, 8, 10000, 15, opt);
  bool ok = purity.passed && orth.passed && chaos.passed && !g.non_mixing && !c.non_mixing;
  return {ok, fmt("beta=%.3f q*^2=%.3f: same-band %.3f (z %.1f, %ld pairs), cross-band %.3f (z %.1f, %ld pairs), "
                  "cross-temperature %.3f (z %.1f); pure contrast %.3f near 0, %.3f near q*q*'",
                  4 * ref, g.all.q_star_sq, purity.mass, purity.z, g.same_band.n_pairs, orth.mass, orth.z,
                  g.cross_band.n_pairs, chaos.mass, chaos.z, cp.mass_zero, cp.cross.mass_near(c.cross.q_star_sq, 0.15))};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "omega oracle", 1, omega_oracle},
      {2, "pair complexity decomposition", 5, psi_decomposition},
      {3, "pair covariance definiteness", 5, sigma_ux_definite},
      {4, "condition M", 90, condition_m},
      {5, "ground state slope", 20, e0_derivative},
      {6, "phase asymptotics", 60, phase_asymptotics},
      {7, "gap", 60, gap_check},
      {8, "band weight consistency", 60, lambda_consistency},
      {9, "alpha generating identity", 1, alpha_identity},
      {10, "GOE log determinant", 60, goe},
      {11, "covariance law", 120, covariance_law},
      {12, "ground state", 600, ground_state},
      {13, "first moment count", 600, kac_rice},
      {14, "1-RSB geometry and chaos", 1200, rsb_and_chaos},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool pass = o.pass && dt <= c.budget_seconds;
    failed += !pass;
    std::printf("%s %2d %s: %s [%.1fs / %.0fs]\n", pass ? "PASS" : "FAIL", c.id, c.name.c_str(), o.detail.c_str(), dt,
                c.budget_seconds);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed ? 1 : 0;
}
