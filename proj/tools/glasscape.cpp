#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <new>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "glasscape/glasscape.hpp"

namespace fs = std::filesystem;
using namespace glasscape;

namespace {

/// Options shared by every subcommand; values are strings until merged into the config.
struct Invocation {
  std::string name;
  std::string config_path;
  std::map<std::string, std::string> flags;
  std::vector<std::string> betas;
  std::vector<std::string> xs;
};

struct Context {
  std::string command;
  KeyValueConfig cfg;
  fs::path out;
  std::uint64_t seed = 0;
  Mixture mixture;
  bool has_mixture = false;

  OutputHeader header() const { return {command, hash(), seed}; }

  std::uint64_t hash() const {
    KeyValueConfig c = cfg;
    c.set("output_dir", "-");
    std::string s = command + "\n" + c.canonical();
    if (has_mixture)
      for (auto [p, v] : mixture.coeffs()) s += "mixture " + std::to_string(p) + " " + format_number(v) + "\n";
    return fnv1a64(s);
  }

  double num(const std::string& key, double fallback) const { return cfg.get_double(key, fallback); }
  int count(const std::string& key, long long fallback, long long min_value = 1) const {
    long long v = cfg.get_int(key, fallback);
    if (v < min_value) throw UsageError(key + " must be at least " + std::to_string(min_value));
    return static_cast<int>(v);
  }
  bool test_mode() const {
    auto mode = cfg.get_string("mode", "exploratory");
    if (mode != "exploratory" && mode != "test") throw UsageError("mode must be exploratory or test");
    return mode == "test";
  }
};

std::vector<double> parse_list(const std::vector<std::string>& items) {
  std::vector<double> out;
  for (const auto& item : items) {
    std::stringstream ss(item);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      KeyValueConfig c;
      c.set("v", tok);
      out.push_back(c.get_double("v", 0.0));
    }
  }
  return out;
}

void emit_summary(const Context& ctx, const std::string& file, const Summary& s) {
  auto os = open_output(ctx.out, file, ctx.header());
  s.write(os);
}

std::string one_line(const std::string& command, const Summary& s, std::size_t fields = 6) {
  std::string line = command;
  for (std::size_t i = 0; i < s.entries().size() && i < fields; ++i)
    line += " " + s.entries()[i].first + "=" + s.entries()[i].second;
  return line;
}

int run_classify(Context& ctx) {
  auto c = classify(ctx.mixture);
  Summary s;
  s.add("kind", to_string(c.kind)).add("g_literal", c.g_literal).add("g_via_theta", c.g_via_theta).add("agree", c.agree);
  emit_summary(ctx, "classify.txt", s);
  std::cout << one_line("classify", s) << "\n";
  return 0;
}

int run_complexity(Context& ctx) {
  const double q = ctx.num("q", 1.0);
  auto gs = ground_state_solution(ctx.mixture, q);
  const double u_lo = ctx.num("u_min", -gs.e0 - 0.3), u_hi = ctx.num("u_max", -gs.e0 + 0.3);
  const double x_lo = ctx.num("x_min", -gs.x0 - 1.0), x_hi = ctx.num("x_max", -gs.x0 + 1.0);
  const int grid = ctx.count("grid", 41, 2);
  ComplexitySurface th(ctx.mixture, q);
  auto os = open_output(ctx.out, "theta.csv", ctx.header());
  CsvWriter w(os, {"q", "u", "x", "theta"});
  for (int i = 0; i < grid; ++i)
    for (int j = 0; j < grid; ++j) {
      double u = u_lo + (u_hi - u_lo) * i / (grid - 1), x = x_lo + (x_hi - x_lo) * j / (grid - 1);
      w.row({q, u, x, th(u, x)});
    }
  Summary s;
  s.add("q", q).add("e0", gs.e0).add("x0", gs.x0).add("e_inf", gs.e_inf).add("points", grid * grid);
  emit_summary(ctx, "complexity.txt", s);
  std::cout << one_line("complexity", s) << "\n";
  return 0;
}

int run_e0(Context& ctx) {
  const double q_lo = ctx.num("q_min", 0.5), q_hi = ctx.num("q_max", 1.0);
  const int grid = ctx.count("grid", 51, 2);
  if (!(q_lo > 0.0 && q_lo < q_hi && q_hi <= 1.0)) throw UsageError("need 0 < q_min < q_max <= 1");
  std::vector<GroundStateSolution> rows(grid);
  parallel_for(static_cast<std::size_t>(grid),
               [&](std::size_t i) { rows[i] = ground_state_solution(ctx.mixture, q_lo + (q_hi - q_lo) * i / (grid - 1)); });
  auto os = open_output(ctx.out, "e0.csv", ctx.header());
  CsvWriter w(os, {"q", "e0", "x0", "e_inf"});
  for (const auto& r : rows) w.row({r.q, r.e0, r.x0, r.e_inf});
  Summary s;
  s.add("q_max", rows.back().q).add("e0", rows.back().e0).add("x0", rows.back().x0).add("e_inf", rows.back().e_inf);
  emit_summary(ctx, "e0.txt", s);
  std::cout << one_line("e0", s) << "\n";
  return 0;
}

int run_psi0(Context& ctx) {
  const int grid = ctx.count("grid", 201, 3);
  auto gs = ground_state_solution(ctx.mixture, 1.0);
  std::vector<double> rs(grid), vals(grid);
  parallel_for(static_cast<std::size_t>(grid), [&](std::size_t i) {
    rs[i] = -1.0 + 2.0 * static_cast<double>(i) / (grid - 1);
    vals[i] = psi0(ctx.mixture, gs, rs[i]);
  });
  auto os = open_output(ctx.out, "psi0.csv", ctx.header());
  CsvWriter w(os, {"r", "psi0"});
  for (int i = 0; i < grid; ++i) w.row({rs[i], vals[i]});
  Summary s;
  s.add("points", grid).add("psi0_zero", psi0(ctx.mixture, gs, 0.0)).add("endpoint_plus", vals.back());
  emit_summary(ctx, "psi0.txt", s);
  std::cout << one_line("psi0", s) << "\n";
  return 0;
}

int run_condm(Context& ctx) {
  auto v = check_condition_m(ctx.mixture, ctx.num("grid_step", 1e-3));
  Summary s;
  s.add("holds", v.holds)
      .add("failed_clause", v.failed_clause ? to_string(*v.failed_clause) : std::string("none"))
      .add("psi0_zero", v.psi0_at_zero)
      .add("d2_psi0_zero", v.d2_psi0_at_zero)
      .add("max_margin", v.max_margin)
      .add("endpoint_plus", v.endpoint_plus)
      .add("endpoint_minus", v.endpoint_minus);
  emit_summary(ctx, "condm.txt", s);
  std::cout << one_line("condm", s, 3) << "\n";
  return 0;
}

int run_phase(Context& ctx, const std::vector<double>& betas) {
  if (betas.empty()) throw UsageError("phase needs at least one --beta");
  std::vector<PhaseSummary> rows;
  for (double b : betas) rows.push_back(phase_summary(ctx.mixture, b));
  auto os = open_output(ctx.out, "phase.csv", ctx.header());
  CsvWriter w(os, {"beta", "q_c", "q_star", "q_star_star", "e_star", "f_beta", "gap_finite", "gap_limit"});
  for (const auto& r : rows) w.row({r.beta, r.q_c, r.q_star, r.q_star_star, r.e_star, r.f_beta, r.gap_finite, r.gap_limit});
  const auto& r = rows.back();
  Summary s;
  s.add("beta", r.beta)
      .add("q_star_star", r.q_star_star)
      .add("q_c", r.q_c)
      .add("q_star", r.q_star)
      .add("ordered", r.q_star_star < r.q_c && r.q_c < r.q_star)
      .add("e_star", r.e_star)
      .add("f_beta", r.f_beta)
      .add("t_minus", r.t_minus)
      .add("t_plus", r.t_plus)
      .add("t_c", r.t_c)
      .add("gap_finite", r.gap_finite)
      .add("gap_limit", r.gap_limit);
  emit_summary(ctx, "phase.txt", s);
  std::cout << one_line("phase", s, 5) << "\n";
  return 0;
}

int assert_in_test_mode(const Context& ctx, bool ok, const std::string& what) {
  if (ok || !ctx.test_mode()) return 0;
  std::cerr << "glasscape: test-mode check failed: " << what << "\n";
  return static_cast<int>(ExitCode::numeric);
}

int run_simulate_crt(Context& ctx) {
  const int n = ctx.count("n", 16, 2), replicas = ctx.count("replicas", 10);
  const double q = ctx.num("q", 1.0);
  SearchOptions opt;
  opt.n_starts = ctx.count("starts", 100);
  auto gs = ground_state_solution(ctx.mixture, q);
  const double half = ctx.num("half_width", 0.05);
  Interval energy{ctx.num("u_min", -gs.e0 - half), ctx.num("u_max", -gs.e0 + half)};
  Interval radial{ctx.num("x_min", -gs.x0 - half), ctx.num("x_max", -gs.x0 + half)};
  auto rs = collect_critical_points(ctx.mixture, n, q, replicas, opt, ctx.seed);
  auto res = crt_count_experiment(rs, energy, radial);
  {
    auto os = open_output(ctx.out, "critical_points.csv", ctx.header());
    std::vector<CriticalPoint> all;
    for (const auto& pts : rs.points) all.insert(all.end(), pts.begin(), pts.end());
    write_critical_points_csv(os, all);
  }
  auto lows = stats::mean_se(lowest_energies(rs));
  Summary s;
  s.add("log_mean_count_per_n", res.log_mean_count_per_n)
      .add("theta_sup", res.theta_sup)
      .add("mean_count", res.window.mean_count)
      .add("zero_fraction", res.window.zero_fraction)
      .add("mean_lowest_energy", lows.mean)
      .add("mean_lowest_energy_se", lows.se)
      .add("e0", gs.e0)
      .add("x0", gs.x0);
  emit_summary(ctx, "crt.txt", s);
  std::cout << one_line("simulate_crt", s, 4) << "\n";
  return assert_in_test_mode(ctx, res.log_mean_count_per_n <= res.theta_sup + 0.2, "count above complexity bound");
}

GibbsOptions gibbs_options(const Context& ctx) {
  GibbsOptions o;
  o.sampler.ladder = ctx.count("ladder", 8);
  o.sampler.snapshots = ctx.count("snapshots", 40);
  o.sampler.moves_per_sweep = ctx.count("moves_per_sweep", 1);
  return o;
}

int run_simulate_gibbs(Context& ctx) {
  const int n = ctx.count("n", 16, 2), chains = ctx.count("chains", 8, 2), sweeps = ctx.count("sweeps", 4000, 2);
  const double beta = ctx.num("beta", 4.0 * beta_reference(ctx.mixture));
  HamiltonianInstance h(ctx.mixture, n, rng::stream_key(ctx.seed, 0x1257));
  auto r = gibbs_experiment(h, beta, chains, sweeps, ctx.seed, gibbs_options(ctx));
  for (auto [file, hist] : {std::pair{"overlap_all.csv", &r.all}, std::pair{"overlap_same_band.csv", &r.same_band},
                            std::pair{"overlap_cross_band.csv", &r.cross_band}}) {
    auto os = open_output(ctx.out, file, ctx.header());
    write_histogram_csv(os, *hist);
  }
  auto purity = mass_check(r.same_band.mass_plus, r.same_band.n_pairs, 0.8);
  auto orth = mass_check(r.cross_band.mass_zero, r.cross_band.n_pairs, 0.8);
  Summary s;
  s.add("beta", beta)
      .add("q_star", r.q_star)
      .add("band_mass", r.band_mass)
      .add("same_band_mass", purity.mass)
      .add("cross_band_mass", orth.mass)
      .add("non_mixing", r.non_mixing)
      .add("e_star", r.e_star)
      .add("band_mass_any_depth", r.band_mass_any_depth)
      .add("distinct_bands", r.distinct_bands)
      .add("same_band_pairs", static_cast<long long>(r.same_band.n_pairs))
      .add("same_band_z", purity.z)
      .add("cross_band_pairs", static_cast<long long>(r.cross_band.n_pairs))
      .add("cross_band_z", orth.z);
  double acc = 0.0;
  for (const auto& d : r.diagnostics) acc += d.acceptance;
  s.add("mean_acceptance", acc / r.diagnostics.size());
  emit_summary(ctx, "gibbs.txt", s);
  std::cout << one_line("simulate_gibbs", s) << "\n";
  return assert_in_test_mode(ctx, purity.passed && orth.passed && !r.non_mixing, "band purity or orthogonality");
}

int run_simulate_chaos(Context& ctx, const std::vector<double>& betas) {
  const int n = ctx.count("n", 16, 2), chains = ctx.count("chains", 8, 2), sweeps = ctx.count("sweeps", 4000, 2);
  const double ref = beta_reference(ctx.mixture);
  double b1 = ctx.num("beta", 4.0 * ref), b2 = ctx.num("beta2", 8.0 * ref);
  if (betas.size() >= 2) {
    b1 = betas[0];
    b2 = betas[1];
  }
  HamiltonianInstance h(ctx.mixture, n, rng::stream_key(ctx.seed, 0x1257));
  auto r = chaos_experiment(h, b1, b2, chains, sweeps, ctx.seed, gibbs_options(ctx));
  {
    auto os = open_output(ctx.out, "overlap_cross_temperature.csv", ctx.header());
    write_histogram_csv(os, r.cross);
  }
  auto chk = mass_check(r.mass_zero, r.cross.n_pairs, 0.7);
  Summary s;
  s.add("beta1", b1).add("beta2", b2).add("mass_zero", r.mass_zero).add("z", chk.z).add("non_mixing", r.non_mixing);
  s.add("pairs", static_cast<long long>(r.cross.n_pairs)).add("mass_near_qq", r.cross.mass_plus);
  emit_summary(ctx, "chaos.txt", s);
  std::cout << one_line("simulate_chaos", s) << "\n";
  return assert_in_test_mode(ctx, chk.passed && !r.non_mixing, "cross-temperature mass near zero");
}

int run_goe(Context& ctx, std::vector<double> xs) {
  if (xs.empty()) xs = {3.0, -3.0};
  const int n = ctx.count("n_matrix", 200, 2), replicas = ctx.count("replicas", 100, 2);
  auto res = goe_check(n, xs, replicas, ctx.seed);
  auto os = open_output(ctx.out, "goe.csv", ctx.header());
  CsvWriter w(os, {"x", "mean_log_det_per_n", "se", "omega_x"});
  bool ok = true;
  for (const auto& r : res) {
    w.row({r.x, r.mean_log_det_per_n, r.se, r.omega_x});
    ok = ok && std::abs(r.mean_log_det_per_n - r.omega_x) <= 0.05;
  }
  Summary s;
  s.add("x", res.front().x).add("mean_log_det_per_n", res.front().mean_log_det_per_n).add("omega_x", res.front().omega_x);
  emit_summary(ctx, "goe.txt", s);
  std::cout << one_line("goe_check", s) << "\n";
  return assert_in_test_mode(ctx, ok, "log determinant off the semicircle potential");
}

const std::vector<std::string> kKeys = {"n",         "q",        "beta",      "beta2",      "replicas", "chains",
                                        "sweeps",    "mode",     "starts",    "grid",       "grid_step", "q_min",
                                        "q_max",     "u_min",    "u_max",     "x_min",      "x_max",     "half_width",
                                        "n_matrix",  "ladder",   "snapshots", "moves_per_sweep"};

std::string flag_name(std::string key) {
  for (auto& c : key)
    if (c == '_') c = '-';
  return "--" + key;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Landscape quantities and desk-scale simulations for mixed spherical spin glasses", "glasscape"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string mixture_path, out_dir, threads;
  std::string seed_flag;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"classify", "Classify a mixture"},
      {"complexity", "Tabulate the complexity surface"},
      {"e0", "Ground state energy and radial derivative over q"},
      {"psi0", "Pair complexity profile at the ground state"},
      {"condm", "Check Condition M"},
      {"phase", "Phase quantities at one or more temperatures"},
      {"simulate_crt", "Count critical points of sampled instances"},
      {"simulate_gibbs", "Sample the Gibbs measure and histogram pair overlaps"},
      {"simulate_chaos", "Cross-temperature overlaps"},
      {"goe_check", "Compare GOE log-determinants with the semicircle potential"}};

  std::vector<Invocation> inv(commands.size());
  for (std::size_t i = 0; i < commands.size(); ++i) {
    auto* sub = app.add_subcommand(commands[i].first, commands[i].second);
    auto& in = inv[i];
    in.name = commands[i].first;
    sub->add_option("--config", in.config_path, "key value config file")->check(CLI::ExistingFile);
    sub->add_option("--mixture", in.flags["mixture_file"], "mixture file");
    sub->add_option("--out", in.flags["output_dir"], "output directory (default .)");
    sub->add_option("--seed", in.flags["seed"], "64-bit seed");
    sub->add_option("--threads", threads, "worker cap; overrides GLASSCAPE_THREADS");
    for (const auto& key : kKeys) {
      if (key == "beta" && (in.name == "phase" || in.name == "simulate_chaos")) continue;
      sub->add_option(flag_name(key), in.flags[key]);
    }
    if (in.name == "phase" || in.name == "simulate_chaos")
      sub->add_option("--beta", in.betas, "inverse temperature; repeat or comma-separate");
    if (in.name == "goe_check") sub->add_option("--x", in.xs, "spectral points; repeat or comma-separate");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ExitCode::usage);
  }

  try {
    std::size_t which = 0;
    for (std::size_t i = 0; i < commands.size(); ++i)
      if (app.got_subcommand(commands[i].first)) which = i;
    auto& in = inv[which];
    if (!threads.empty()) setenv("GLASSCAPE_THREADS", threads.c_str(), 1);

    Context ctx;
    ctx.command = in.name;
    if (!in.config_path.empty()) ctx.cfg = KeyValueConfig::load(in.config_path);
    for (const auto& [k, v] : in.flags)
      if (!v.empty()) ctx.cfg.set(k, v);
    auto betas = parse_list(in.betas);
    auto xs = parse_list(in.xs);
    if (in.name == "simulate_chaos" && betas.size() == 1) ctx.cfg.set("beta", format_number(betas[0]));
    if (in.name == "phase" && betas.empty() && ctx.cfg.has("beta")) betas = {ctx.cfg.get_double("beta", 0.0)};
    if (in.name == "goe_check" && xs.empty() && ctx.cfg.has("x")) xs = {ctx.cfg.get_double("x", 0.0)};

    ctx.seed = static_cast<std::uint64_t>(ctx.cfg.get_int("seed", 1));
    ctx.out = ctx.cfg.get_string("output_dir", ".");
    if (in.name != "goe_check") {
      auto path = ctx.cfg.get("mixture_file");
      if (!path) throw UsageError(in.name + " needs --mixture or mixture_file in the config");
      ctx.mixture = load_mixture(*path);
      ctx.has_mixture = true;
    }

    if (in.name == "classify") return run_classify(ctx);
    if (in.name == "complexity") return run_complexity(ctx);
    if (in.name == "e0") return run_e0(ctx);
    if (in.name == "psi0") return run_psi0(ctx);
    if (in.name == "condm") return run_condm(ctx);
    if (in.name == "phase") return run_phase(ctx, betas);
    if (in.name == "simulate_crt") return run_simulate_crt(ctx);
    if (in.name == "simulate_gibbs") return run_simulate_gibbs(ctx);
    if (in.name == "simulate_chaos") return run_simulate_chaos(ctx, betas);
    return run_goe(ctx, xs);
  } catch (const Error& e) {
    std::cerr << "glasscape: " << e.what() << "\n";
    return static_cast<int>(e.code());
  } catch (const std::bad_alloc&) {
    std::cerr << "glasscape: out of memory\n";
    return static_cast<int>(ExitCode::resource);
  } catch (const std::exception& e) {
    std::cerr << "glasscape: " << e.what() << "\n";
    return static_cast<int>(ExitCode::numeric);
  }
}
