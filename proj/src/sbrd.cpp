#include "sinkrank/sbrd.hpp"

#include "sinkrank/rng.hpp"

#include <algorithm>
#include <cmath>

namespace sinkrank {

double FeasibleFunction::effective_base() const {
  if (base > 0.0) return base;
  return static_cast<double>(num_sinks) * num_agents - num_agents + 2;
}

double FeasibleFunction::eval_mean(double x) const {
  return std::pow(effective_base(), x / delta);
}

double FeasibleFunction::eval(const Eigen::MatrixXd& payoff_window) const {
  if (payoff_window.rows() != weights.size())
    throw std::runtime_error("feasible function: payoff window has wrong agent count");
  return eval_mean((weights.transpose() * payoff_window).mean());
}

void FeasibleFunction::validate() const {
  if (!(delta > 0.0)) throw std::runtime_error("feasible function: delta must be positive");
  if (num_sinks < 1 || num_agents < 1)
    throw std::runtime_error("feasible function: needs at least one sink and one agent");
  const double floor = static_cast<double>(num_sinks) * num_agents - num_agents + 1;
  if (!(effective_base() > floor))
    throw std::runtime_error("feasible function: base must exceed v*n - n + 1");
  validate_weights(weights, num_agents);
}

FeasibleFunction default_feasible(int num_sinks, int num_agents, double delta,
                                  const Eigen::VectorXd& weights) {
  FeasibleFunction f;
  f.delta = delta;
  f.num_sinks = num_sinks;
  f.num_agents = num_agents;
  f.weights = weights;
  f.validate();
  return f;
}

SBRDContext make_context(const MetaGame& meta, const Eigen::VectorXd& weights, double tie_tol,
                         std::function<PayoffEstimate(long)> estimator) {
  meta.validate();
  validate_weights(weights, meta.num_agents);
  SBRDContext ctx;
  ctx.meta = &meta;
  ctx.graph = build_sbr_graph(meta, tie_tol);
  ctx.sinks = sink_equilibria(ctx.graph);
  ctx.sink_of = sink_membership(ctx.graph, ctx.sinks);
  const long np = meta.num_profiles();
  ctx.br.assign(meta.num_agents, std::vector<std::vector<int>>(np));
  for (long s = 0; s < np; ++s) {
    const auto profile = meta.decode(s);
    for (int i = 0; i < meta.num_agents; ++i)
      ctx.br[i][s] = best_responses(meta, i, profile, tie_tol);
  }
  ctx.wperf = performance(meta, weights);
  ctx.estimator = std::move(estimator);
  ctx.est_mean = Eigen::MatrixXd::Zero(meta.num_agents, np);
  ctx.est_stderr = Eigen::MatrixXd::Zero(meta.num_agents, np);
  ctx.est_ready.assign(np, 0);
  return ctx;
}

namespace {

void ensure_estimate(SBRDContext& ctx, long profile) {
  if (ctx.est_ready[profile]) return;
  if (!ctx.estimator) throw std::runtime_error("sbrd: empirical mode without an estimator");
  const PayoffEstimate est = ctx.estimator(profile);
  ctx.est_mean.col(profile) = est.mean;
  ctx.est_stderr.col(profile) = est.std_err;
  ctx.est_ready[profile] = 1;
}

// Recorded payoff column for a profile: exact table row, or the cached
// Monte Carlo estimate in empirical mode.
void record_column(SBRDContext& ctx, const SBRDConfig& cfg, long profile, Eigen::VectorXd& mean,
                   Eigen::VectorXd& se) {
  if (cfg.mode == SBRDMode::kExact) {
    mean = ctx.game().payoffs.row(profile).transpose();
    se = Eigen::VectorXd::Zero(ctx.game().num_agents);
  } else {
    ensure_estimate(ctx, profile);
    mean = ctx.est_mean.col(profile);
    se = ctx.est_stderr.col(profile);
  }
}

void append_profile(SBRDContext& ctx, const SBRDConfig& cfg, HistoryState& state, long profile) {
  const int m = static_cast<int>(state.window.size());
  for (int k = 0; k + 1 < m; ++k) {
    state.window[k] = state.window[k + 1];
    state.payoffs.col(k) = state.payoffs.col(k + 1);
    state.std_errs.col(k) = state.std_errs.col(k + 1);
  }
  state.window[m - 1] = profile;
  Eigen::VectorXd mean, se;
  record_column(ctx, cfg, profile, mean, se);
  state.payoffs.col(m - 1) = mean;
  state.std_errs.col(m - 1) = se;
}

// Payoff of one agent as the dynamics observes it.
double observed(const SBRDContext& ctx, const SBRDConfig& cfg, long profile, int agent) {
  if (cfg.mode == SBRDMode::kExact) return ctx.game().payoffs(profile, agent);
  return ctx.est_mean(agent, profile);
}

double improvement_margin(const SBRDContext& ctx, const SBRDConfig& cfg, long from, long to,
                          int agent) {
  if (cfg.mode == SBRDMode::kExact) return kStrictTol;
  const double s1 = ctx.est_stderr(agent, from);
  const double s2 = ctx.est_stderr(agent, to);
  return std::max(kStrictTol, 3.0 * std::sqrt(s1 * s1 + s2 * s2));
}

}  // namespace

HistoryState initial_history(SBRDContext& ctx, const SBRDConfig& cfg, long initial_profile) {
  if (cfg.m < 1) throw std::runtime_error("sbrd: memory length must be >= 1");
  if (initial_profile < 0 || initial_profile >= ctx.game().num_profiles())
    throw std::out_of_range("sbrd: initial profile out of range");
  if (cfg.mode == SBRDMode::kEmpirical) ensure_estimate(ctx, initial_profile);
  HistoryState state;
  state.window.assign(cfg.m, initial_profile);
  state.payoffs = Eigen::MatrixXd::Zero(ctx.game().num_agents, cfg.m);
  state.std_errs = Eigen::MatrixXd::Zero(ctx.game().num_agents, cfg.m);
  return state;
}

StepRecord sbrd_step(SBRDContext& ctx, const SBRDConfig& cfg, const FeasibleFunction& f,
                     HistoryState& state, long tau) {
  if (!(cfg.epsilon >= 0.0 && cfg.epsilon < 1.0))
    throw std::runtime_error("sbrd: epsilon must lie in [0,1)");
  StepRecord rec;
  rec.tau = tau;
  rec.kappa = f.eval(state.payoffs);
  rec.eps_bar = cfg.epsilon > 0.0 ? std::pow(cfg.epsilon, rec.kappa) : 0.0;

  const MetaGame& meta = ctx.game();
  const int n = meta.num_agents;
  const long s = state.window.back();
  const auto sprof = meta.decode(s);

  auto selector = substream(cfg.seed, static_cast<std::uint64_t>(tau), 0);
  rec.selected_agent = static_cast<int>(uniform_index(selector, n));

  auto strat = substream(cfg.seed, static_cast<std::uint64_t>(tau), 1);
  auto next = sprof;
  rec.explored.assign(n, 0);
  for (int i = 0; i < n; ++i) {
    const bool explore = u01(strat) < rec.eps_bar;
    rec.explored[i] = explore;
    if (i == rec.selected_agent) {
      if (explore) {
        next[i] = static_cast<int>(uniform_index(strat, meta.strategy_count(i)));
      } else {
        const auto& brs = ctx.br[i][s];
        next[i] = brs[uniform_index(strat, static_cast<int>(brs.size()))];
      }
    } else if (explore) {
      next[i] = static_cast<int>(uniform_index(strat, meta.strategy_count(i)));
    }
  }
  const long t = meta.encode(next);
  rec.next_profile = t;
  if (cfg.mode == SBRDMode::kEmpirical) ensure_estimate(ctx, t);

  auto hist = substream(cfg.seed, static_cast<std::uint64_t>(tau), 2);
  rec.history_explored = u01(hist) < rec.eps_bar;
  if (rec.history_explored) {
    rec.branch = HistoryBranch::kForcedAppend;
    append_profile(ctx, cfg, state, t);
  } else if (ctx.graph.pne[s]) {
    rec.branch = HistoryBranch::kPneRepeat;
    append_profile(ctx, cfg, state, s);
  } else {
    const int j = rec.selected_agent;
    const double gain = observed(ctx, cfg, t, j) - observed(ctx, cfg, s, j);
    if (gain > improvement_margin(ctx, cfg, s, t, j)) {
      rec.branch = HistoryBranch::kImproveAppend;
      append_profile(ctx, cfg, state, t);
    } else {
      rec.branch = HistoryBranch::kStay;
    }
  }
  return rec;
}

RunSummary run_sbrd(SBRDContext& ctx, const SBRDConfig& cfg, const FeasibleFunction& f,
                    long initial_profile, long steps, long burn_in) {
  RunSummary summary;
  summary.steps = steps;
  summary.burn_in = std::max(burn_in, static_cast<long>(cfg.m));
  summary.profile_visits = Eigen::VectorXd::Zero(ctx.game().num_profiles());
  summary.sink_visits.assign(ctx.sinks.size(), 0.0);
  summary.rcc_occupancy.assign(ctx.sinks.size(), 0.0);

  HistoryState state = initial_history(ctx, cfg, initial_profile);
  for (long tau = 1; tau <= steps; ++tau) {
    sbrd_step(ctx, cfg, f, state, tau);
    const int rid = rcc_of_window(ctx, state.window);
    if (summary.absorption_step < 0) {
      if (rid >= 0) {
        summary.absorption_step = tau;
        summary.absorbed_rcc = rid;
      }
    } else if (rid != summary.absorbed_rcc) {
      ++summary.post_absorption_breaks;
    }
    if (tau > summary.burn_in) {
      const long recorded = state.window.back();
      summary.profile_visits[recorded] += 1.0;
      const int q = ctx.sink_of[recorded];
      if (q >= 0)
        summary.sink_visits[q] += 1.0;
      else
        summary.outside_sinks += 1.0;
      if (rid >= 0) summary.rcc_occupancy[rid] += 1.0;
    }
  }
  summary.final_state = std::move(state);
  return summary;
}

bool window_in_rcc(const SBRDContext& ctx, const std::vector<long>& window, int sink_id) {
  if (sink_id < 0 || sink_id >= static_cast<int>(ctx.sinks.size())) return false;
  const auto& members = ctx.sinks[sink_id].members;
  for (long s : window)
    if (std::find(members.begin(), members.end(), static_cast<int>(s)) == members.end())
      return false;
  return is_sbrp(ctx.graph, window);
}

int rcc_of_window(const SBRDContext& ctx, const std::vector<long>& window) {
  const int candidate = ctx.sink_of[window.front()];
  if (candidate < 0) return -1;
  return window_in_rcc(ctx, window, candidate) ? candidate : -1;
}

}  // namespace sinkrank
