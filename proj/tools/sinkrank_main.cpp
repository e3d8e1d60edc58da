// Command-line front end: analyze/rank joint strategy profiles by sink metrics,
// simulate the perturbed dynamics, solve the exact history chain, check coarse
// correlated equilibria, and verify the stability guarantees end to end.
#include "sinkrank/equilibrium.hpp"
#include "sinkrank/io.hpp"
#include "sinkrank/rng.hpp"

#include "CLI11.hpp"

#include <iostream>

using namespace sinkrank;

namespace {

Eigen::VectorXd parse_vector(const std::string& csv) {
  std::vector<double> vals;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) vals.push_back(std::stod(tok));
  }
  Eigen::VectorXd out(static_cast<long>(vals.size()));
  for (size_t i = 0; i < vals.size(); ++i) out[static_cast<long>(i)] = vals[i];
  return out;
}

std::vector<double> parse_list(const std::string& csv) {
  std::vector<double> vals;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) vals.push_back(std::stod(tok));
  }
  return vals;
}

MetricKind parse_metric(const std::string& name) {
  if (name == "cycle") return MetricKind::kCycle;
  if (name == "memory") return MetricKind::kMemory;
  throw CLI::ValidationError("--metric", "expected 'cycle' or 'memory'");
}

void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty())
    std::cout << content;
  else
    write_text(out_path, content);
}

std::string mode_name(VerifyMode mode) {
  switch (mode) {
    case VerifyMode::kCycleExact: return "cycle-exact";
    case VerifyMode::kMemoryExact: return "memory-exact";
    case VerifyMode::kCycleApprox: return "cycle-approx";
    case VerifyMode::kMemoryApprox: return "memory-approx";
  }
  return "?";
}

int cmd_analyze(const std::string& input, const std::string& weights_csv,
                const std::string& metric_name, int m, const std::string& out,
                const std::string& dot_path) {
  Eigen::VectorXd aw = weights_csv.empty() ? Eigen::VectorXd() : parse_vector(weights_csv);
  LoadedInput li = load_input(input, aw);
  auto sinks = sink_equilibria(li.graph);
  MetricReport report =
      evaluate_metric(li.graph, sinks, li.node_weights, parse_metric(metric_name), m);

  std::ostringstream os;
  os << "nodes: " << li.graph.num_nodes << "\n";
  os << "edges: " << li.graph.num_edges() << "\n";
  long pne_count = 0;
  for (int v = 0; v < li.graph.num_nodes; ++v)
    if (li.graph.pne[v]) ++pne_count;
  os << "pure equilibria: " << pne_count;
  for (int v = 0; v < li.graph.num_nodes; ++v)
    if (li.graph.pne[v]) os << " " << li.graph.labels[v];
  os << "\n";
  os << "sink components: " << sinks.size() << "\n";
  for (const auto& q : sinks) {
    os << "  sink " << q.id << " (" << (metric_name == "cycle" ? "cycle" : "memory")
       << " metric " << report.per_sink[q.id] << ", length bound "
       << report.cycle_length_bound[q.id] << "):";
    for (int v : q.members) os << " " << li.graph.labels[v];
    os << "\n";
  }
  emit(out, os.str());
  if (!dot_path.empty()) write_text(dot_path, to_dot(li.graph, sinks));
  return 0;
}

int cmd_rank(const std::string& input, const std::string& weights_csv,
             const std::string& metric_name, int m, const std::string& out) {
  Eigen::VectorXd aw = weights_csv.empty() ? Eigen::VectorXd() : parse_vector(weights_csv);
  LoadedInput li = load_input(input, aw);
  auto sinks = sink_equilibria(li.graph);
  auto rows = rank_profiles(li.graph, sinks, li.node_weights, parse_metric(metric_name), m);
  RunManifest mf = make_manifest("rank", input,
                                 {{"metric", metric_name},
                                  {"memory", std::to_string(m)},
                                  {"weights", weights_csv.empty() ? "uniform" : weights_csv}},
                                 0);
  emit(out, ranking_csv(rows, mf));
  return 0;
}

int cmd_simulate(const std::string& input, const std::string& weights_csv, int m, double epsilon,
                 double delta, long steps, long burn_in, std::uint64_t seed,
                 const std::string& mode_name_str, long episodes, long initial,
                 const std::string& out) {
  Eigen::VectorXd aw = weights_csv.empty() ? Eigen::VectorXd() : parse_vector(weights_csv);
  LoadedInput li = load_input(input, aw);
  if (!li.meta) throw std::runtime_error("simulate needs a game or meta-game input");

  SBRDConfig cfg;
  cfg.epsilon = epsilon;
  cfg.m = m;
  cfg.seed = seed;
  cfg.episodes = episodes;
  std::optional<StochasticGame> game;
  std::optional<MetaGame> empirical_meta;
  if (mode_name_str == "empirical") {
    cfg.mode = SBRDMode::kEmpirical;
    game = load_game(input);  // empirical mode needs the underlying game
    empirical_meta = MetaGame::from_game_empirical(*game, episodes, seed);
  } else if (mode_name_str != "exact") {
    throw CLI::ValidationError("--mode", "expected 'exact' or 'empirical'");
  }
  const MetaGame& meta = empirical_meta ? *empirical_meta : *li.meta;
  Eigen::VectorXd w = aw.size() ? aw : uniform_weights(meta.num_agents);

  std::function<PayoffEstimate(long)> estimator;
  if (cfg.mode == SBRDMode::kEmpirical) {
    const StochasticGame* g = &*game;
    const MetaGame* mg = &meta;
    estimator = [g, mg, &cfg](long profile) {
      JointPolicy jp;
      auto p = mg->decode(profile);
      for (int i = 0; i < mg->num_agents; ++i) jp.action_for.push_back(mg->policies[i][p[i]]);
      return estimate_payoff_empirical(*g, jp, cfg.episodes,
                                       mix64(cfg.seed ^ static_cast<std::uint64_t>(profile)));
    };
  }
  SBRDContext ctx = make_context(meta, w, cfg.tie_tol, estimator);
  FeasibleFunction f = default_feasible(static_cast<int>(ctx.sinks.size()), meta.num_agents,
                                        delta, w);
  RunSummary summary = run_sbrd(ctx, cfg, f, initial, steps, burn_in);

  RunManifest mf = make_manifest("simulate", input,
                                 {{"memory", std::to_string(m)},
                                  {"epsilon", std::to_string(epsilon)},
                                  {"delta", std::to_string(delta)},
                                  {"steps", std::to_string(steps)},
                                  {"mode", mode_name_str}},
                                 seed);
  emit(out, occupancy_csv(meta, ctx.sink_of, summary.profile_visits, mf));

  std::ostringstream os;
  const double recorded = std::max(1.0, static_cast<double>(summary.steps - summary.burn_in));
  os << "steps: " << summary.steps << " (burn-in " << summary.burn_in << ")\n";
  for (size_t i = 0; i < ctx.sinks.size(); ++i)
    os << "sink " << i << " occupancy: " << summary.sink_visits[i] / recorded
       << " (recurrent-class " << summary.rcc_occupancy[i] / recorded << ")\n";
  os << "outside sinks: " << summary.outside_sinks / recorded << "\n";
  if (summary.absorption_step >= 0)
    os << "absorbed into recurrent class " << summary.absorbed_rcc << " at step "
       << summary.absorption_step << " (breaks after: " << summary.post_absorption_breaks
       << ")\n";
  else
    os << "not absorbed\n";
  std::cerr << os.str();
  return 0;
}

int cmd_chain(const std::string& input, const std::string& weights_csv, int m, double delta,
              const std::string& grid_csv, double base, const std::string& out) {
  Eigen::VectorXd aw = weights_csv.empty() ? Eigen::VectorXd() : parse_vector(weights_csv);
  LoadedInput li = load_input(input, aw);
  if (!li.meta) throw std::runtime_error("chain needs a game or meta-game input");
  const MetaGame& meta = *li.meta;
  Eigen::VectorXd w = aw.size() ? aw : uniform_weights(meta.num_agents);
  auto sinks = sink_equilibria(li.graph);
  FeasibleFunction f = default_feasible(static_cast<int>(sinks.size()), meta.num_agents, delta, w);
  if (base > 0.0) f.base = base;
  std::vector<double> grid = grid_csv.empty() ? kDefaultEpsGrid : parse_list(grid_csv);
  StabilityReport st = stochastically_stable(meta, m, f, grid);

  std::ostringstream os;
  os << "windows: " << st.num_windows << " (gamma table "
     << (st.full_gamma_table ? "full" : "recurrent-only") << ")\n";
  for (size_t i = 0; i < st.rcc_windows.size(); ++i) {
    double g = std::numeric_limits<double>::infinity();
    for (long h : st.rcc_windows[i]) g = std::min(g, st.gamma[h]);
    os << "sink " << i << ": recurrent windows " << st.rcc_windows[i].size()
       << ", potential " << g << ", lower-bound sum " << st.gamma_bar[i] << "\n";
  }
  os << "stable sinks:";
  for (int q : st.stable_sinks) os << " " << q;
  os << "\nstable profiles:";
  for (long s : st.stable_profiles) os << " " << meta.profile_label(s);
  os << "\n";
  for (size_t k = 0; k < st.eps_grid.size(); ++k) {
    double mass = 0.0;
    for (long h : st.stable_windows) mass += st.pi[k][h];
    os << "eps " << st.eps_grid[k] << ": stable-set mass " << mass;
    if (k > 0) os << " (tv from previous " << st.tv_successive[k - 1] << ")";
    os << "\n";
  }
  os << "limit profile mass:";
  for (long s = 0; s < meta.num_profiles(); ++s)
    if (st.profile_mass_limit[s] > 1e-3)
      os << " " << meta.profile_label(s) << "=" << st.profile_mass_limit[s];
  os << "\n";
  emit(out, os.str());
  return 0;
}

int cmd_cce(const std::string& input, const std::string& dist_csv, const std::string& support_csv,
            double tol, double mu_num) {
  LoadedInput li = load_input(input, Eigen::VectorXd());
  if (!li.meta) throw std::runtime_error("cce-check needs a game or meta-game input");
  const MetaGame& meta = *li.meta;
  if (!dist_csv.empty()) {
    Eigen::VectorXd q = parse_vector(dist_csv);
    if (q.size() != meta.num_profiles())
      throw std::runtime_error("distribution length must equal the number of profiles");
    CceCheck check = is_cce(meta, q, tol);
    std::cout << (check.ok ? "CCE" : "not a CCE") << " (worst violation "
              << check.worst_violation;
    if (check.worst_agent >= 0)
      std::cout << ", agent " << check.worst_agent << " deviating to strategy "
                << check.worst_deviation;
    std::cout << ")\n";
    return check.ok ? 0 : 1;
  }
  if (!support_csv.empty()) {
    std::vector<long> support;
    for (double v : parse_list(support_csv)) support.push_back(static_cast<long>(v));
    Rational mu = to_rational(mu_num);
    SupportFeasibility sf = cce_with_support_exists(meta, support, mu);
    if (sf.feasible) {
      std::cout << "feasible (" << sf.lp_variables << " LP variables); witness:";
      for (long s : support) std::cout << " " << meta.profile_label(s) << "=" << sf.witness[s];
      std::cout << "\n";
      return 0;
    }
    std::cout << "infeasible (" << sf.lp_variables << " LP variables)\n";
    return 1;
  }
  throw std::runtime_error("cce-check needs --dist or --support");
}

int cmd_verify(const std::string& input, const std::string& weights_csv,
               const std::string& mode_str, double delta, double delta0, double delta_bar, int m,
               double base, const std::string& grid_csv, double mass_threshold) {
  Eigen::VectorXd aw = weights_csv.empty() ? Eigen::VectorXd() : parse_vector(weights_csv);
  LoadedInput li = load_input(input, aw);
  if (!li.meta) throw std::runtime_error("verify needs a game or meta-game input");

  VerifyOptions opt;
  if (mode_str == "cycle-exact")
    opt.mode = VerifyMode::kCycleExact;
  else if (mode_str == "memory-exact")
    opt.mode = VerifyMode::kMemoryExact;
  else if (mode_str == "cycle-approx")
    opt.mode = VerifyMode::kCycleApprox;
  else if (mode_str == "memory-approx")
    opt.mode = VerifyMode::kMemoryApprox;
  else
    throw CLI::ValidationError("--mode", "expected cycle-exact|memory-exact|cycle-approx|memory-approx");
  opt.delta = delta;
  if (delta0 > 0.0) opt.delta0 = delta0;
  if (delta_bar > 0.0) opt.delta_bar = delta_bar;
  opt.m = m;
  opt.base = base;
  opt.weights = aw;
  opt.mass_threshold = mass_threshold;
  if (!grid_csv.empty()) opt.eps_grid = parse_list(grid_csv);

  VerifyReport report = verify_guarantees(*li.meta, opt);
  std::cout << "mode: " << mode_name(report.mode) << "\n";
  std::cout << "preconditions: " << (report.preconditions_ok ? "ok" : "FAILED") << "\n";
  for (const auto& msg : report.precondition_failures) std::cout << "  - " << msg << "\n";
  if (report.preconditions_ok) {
    std::cout << "payoff bound: " << report.j_max << ", cycle length bound: "
              << report.cycle_bound << ", required memory: " << report.required_m << "\n";
    std::cout << "sink metrics:";
    for (double v : report.sink_metric) std::cout << " " << v;
    std::cout << " (best sink " << report.best_sink << ")\n";
    std::cout << "conclusion: " << (report.conclusion_ok ? "ok" : "FAILED") << "\n";
    for (const auto& msg : report.notes) std::cout << "  - " << msg << "\n";
  }
  return report.exit_code();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sink-equilibrium ranking and stability toolkit"};
  app.require_subcommand(1);

  std::string input, weights_csv, out, metric_name = "cycle", dot_path;
  int m = 1;

  auto* analyze = app.add_subcommand("analyze", "graph, sinks, and metrics of an input");
  analyze->add_option("--input", input)->required();
  analyze->add_option("--weights", weights_csv, "agent weights w1,w2,...");
  analyze->add_option("--metric", metric_name, "cycle|memory");
  analyze->add_option("--memory", m, "memory length for the memory metric");
  analyze->add_option("--out", out, "write the report to a file");
  analyze->add_option("--dot", dot_path, "write a DOT rendering");

  auto* rank = app.add_subcommand("rank", "CSV ranking of profiles by sink metric");
  rank->add_option("--input", input)->required();
  rank->add_option("--weights", weights_csv);
  rank->add_option("--metric", metric_name);
  rank->add_option("--memory", m);
  rank->add_option("--out", out);

  double epsilon = 0.0, delta = 0.1;
  long steps = 10000, burn_in = 0, episodes = 1000, initial = 0;
  std::uint64_t seed = 0;
  std::string sim_mode = "exact";
  auto* simulate = app.add_subcommand("simulate", "run the perturbed dynamics");
  simulate->add_option("--input,--game", input)->required();
  simulate->add_option("--weights", weights_csv);
  simulate->add_option("--memory", m, "window length")->required();
  simulate->add_option("--epsilon", epsilon, "exploration rate in [0,1)");
  simulate->add_option("--delta", delta, "schedule resolution");
  simulate->add_option("--steps", steps);
  simulate->add_option("--burn-in", burn_in);
  simulate->add_option("--seed", seed);
  simulate->add_option("--mode", sim_mode, "exact|empirical");
  simulate->add_option("--episodes", episodes, "Monte Carlo episodes per profile");
  simulate->add_option("--initial", initial, "initial profile index");
  simulate->add_option("--out", out, "occupancy CSV path");

  std::string grid_csv;
  double base = 0.0;
  auto* chain = app.add_subcommand("chain", "exact stationary analysis over windows");
  chain->add_option("--input,--game", input)->required();
  chain->add_option("--weights", weights_csv);
  chain->add_option("--memory", m)->required();
  chain->add_option("--delta", delta);
  chain->add_option("--epsilon-grid", grid_csv, "e1,e2,... (descending)");
  chain->add_option("--base", base, "override the schedule base");
  chain->add_option("--out", out);

  std::string dist_csv, support_csv;
  double tol = kCceDefaultTol, mu = 1e-6;
  auto* cce = app.add_subcommand("cce-check", "coarse correlated equilibrium checks");
  cce->add_option("--input", input)->required();
  cce->add_option("--dist", dist_csv, "distribution over profiles q1,q2,...");
  cce->add_option("--support", support_csv, "profile indices for exact feasibility");
  cce->add_option("--tol", tol);
  cce->add_option("--mu", mu, "minimum support mass");

  std::string verify_mode = "cycle-exact";
  double delta0 = 0.0, delta_bar = 0.0, mass_threshold = 1e-3;
  auto* verify = app.add_subcommand("verify", "check the stability guarantees");
  verify->add_option("--input,--game", input)->required();
  verify->add_option("--weights", weights_csv);
  verify->add_option("--mode", verify_mode, "cycle-exact|memory-exact|cycle-approx|memory-approx");
  verify->add_option("--delta", delta)->required();
  verify->add_option("--delta0", delta0, "metric gap (exact modes)");
  verify->add_option("--delta-bar", delta_bar, "target tolerance (approx modes)");
  verify->add_option("--memory", m)->required();
  verify->add_option("--base", base);
  verify->add_option("--epsilon-grid", grid_csv);
  verify->add_option("--mass-threshold", mass_threshold);

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(analyze))
      return cmd_analyze(input, weights_csv, metric_name, m, out, dot_path);
    if (app.got_subcommand(rank)) return cmd_rank(input, weights_csv, metric_name, m, out);
    if (app.got_subcommand(simulate))
      return cmd_simulate(input, weights_csv, m, epsilon, delta, steps, burn_in, seed, sim_mode,
                          episodes, initial, out);
    if (app.got_subcommand(chain))
      return cmd_chain(input, weights_csv, m, delta, grid_csv, base, out);
    if (app.got_subcommand(cce)) return cmd_cce(input, dist_csv, support_csv, tol, mu);
    if (app.got_subcommand(verify))
      return cmd_verify(input, weights_csv, verify_mode, delta, delta0, delta_bar, m, base,
                        grid_csv, mass_threshold);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
