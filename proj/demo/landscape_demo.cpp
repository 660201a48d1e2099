// Prints the landscape summary of a near-pure mixture and counts the
// critical points of one small sampled instance.
#include <cstdio>

#include "glasscape/glasscape.hpp"

using namespace glasscape;

int main() {
  auto m = Mixture::from_terms({{3, 0.96}, {4, 0.04}});
  auto c = classify(m);
  auto gs = ground_state_solution(m, 1.0);
  std::printf("kind %s  E0 %.6f  x0 %.6f  Einf %.6f\n", to_string(c.kind).c_str(), gs.e0, gs.x0, gs.e_inf);

  auto v = check_condition_m(m);
  std::printf("condition M %s  d2 psi0(0) %.4g  margin %.4g\n", v.holds ? "holds" : "fails", v.d2_psi0_at_zero,
              v.max_margin);

  auto p = phase_summary(m, 40.0);
  std::printf("beta 40: q** %.5f < q_c %.5f < q* %.5f  gap %.6f (limit %.6f)\n", p.q_star_star, p.q_c, p.q_star,
              p.gap_finite, p.gap_limit);

  HamiltonianInstance h(m, 16, 7);
  SearchOptions opt;
  opt.n_starts = 200;
  auto pts = find_q_critical(h, 1.0, opt, 7);
  int minima = 0;
  for (const auto& cp : pts) minima += cp.index == 0;
  std::printf("N=16: %zu critical points, %d minima, lowest energy %.4f\n", pts.size(), minima,
              pts.empty() ? 0.0 : pts.front().energy_per_site);
}
