#pragma once

#include "sinkrank/metrics.hpp"
#include "sinkrank/response_graph.hpp"

#include <deque>
#include <functional>

namespace sinkrank {

// Exploration-rate schedule: kappa = base^(x / delta) where x is the mean
// weighted column payoff of the recorded window, base defaults to v*n - n + 2
// (v sinks, n agents). Growth by more than v*n - n + 1 per delta step is the
// defining property; validate() enforces it.
struct FeasibleFunction {
  double delta = 0.1;
  int num_sinks = 1;
  int num_agents = 1;
  double base = 0.0;              // 0 selects the default v*n - n + 2
  Eigen::VectorXd weights;

  double effective_base() const;
  double eval_mean(double x) const;                       // base^(x/delta)
  double eval(const Eigen::MatrixXd& payoff_window) const;  // n x m columns
  void validate() const;
};
FeasibleFunction default_feasible(int num_sinks, int num_agents, double delta,
                                  const Eigen::VectorXd& weights);

enum class SBRDMode { kExact, kEmpirical };

struct SBRDConfig {
  double epsilon = 0.0;           // in [0,1)
  int m = 1;                      // memory length >= 1
  SBRDMode mode = SBRDMode::kExact;
  long episodes = 1000;           // empirical estimation per profile
  std::uint64_t seed = 0;
  double tie_tol = kTieTol;
};

// Rolling memory of the last m profiles with their recorded payoff columns.
// The payoff matrix starts at zero and becomes column-exact after m appends.
struct HistoryState {
  std::vector<long> window;       // oldest first, size m
  Eigen::MatrixXd payoffs;        // n x m, column k for window[k]
  Eigen::MatrixXd std_errs;       // same shape; zero in exact mode
};

enum class HistoryBranch { kPneRepeat, kImproveAppend, kStay, kForcedAppend };

struct StepRecord {
  long tau = 0;
  int selected_agent = 0;
  std::vector<char> explored;     // per agent (strategy coins)
  long next_profile = 0;          // s_{tau+1}
  HistoryBranch branch = HistoryBranch::kStay;
  bool history_explored = false;  // the step-6 coin
  double kappa = 0.0;
  double eps_bar = 0.0;
};

// Precomputed context shared by simulation steps: best-response sets, PNE
// flags, graph, sinks, weighted performance per profile.
struct SBRDContext {
  const MetaGame* meta = nullptr;
  SBRGraph graph;
  std::vector<SinkEquilibrium> sinks;
  std::vector<int> sink_of;
  std::vector<std::vector<std::vector<int>>> br;   // [agent][profile]
  Eigen::VectorXd wperf;
  // Empirical mode: Monte Carlo estimate per profile, cached on first visit.
  std::function<PayoffEstimate(long profile)> estimator;
  Eigen::MatrixXd est_mean;        // lazily filled caches
  Eigen::MatrixXd est_stderr;
  std::vector<char> est_ready;

  const MetaGame& game() const { return *meta; }
};
SBRDContext make_context(const MetaGame& meta, const Eigen::VectorXd& weights,
                         double tie_tol = kTieTol,
                         std::function<PayoffEstimate(long)> estimator = nullptr);

HistoryState initial_history(SBRDContext& ctx, const SBRDConfig& cfg, long initial_profile);

// One phase of the perturbed dynamics. Coins for strategy selection and for
// the history update come from independent substreams of (seed, tau, role).
StepRecord sbrd_step(SBRDContext& ctx, const SBRDConfig& cfg, const FeasibleFunction& f,
                     HistoryState& state, long tau);

struct RunSummary {
  long steps = 0;
  long burn_in = 0;
  Eigen::VectorXd profile_visits;       // recorded profile per step, tau > burn_in
  std::vector<double> sink_visits;      // by sink id
  double outside_sinks = 0.0;
  std::vector<double> rcc_occupancy;    // steps whose window is inside sink i's recurrent class
  long absorption_step = -1;            // first step whose window enters a recurrent class
  int absorbed_rcc = -1;
  long post_absorption_breaks = 0;      // windows leaving that class afterwards
  HistoryState final_state;
};
RunSummary run_sbrd(SBRDContext& ctx, const SBRDConfig& cfg, const FeasibleFunction& f,
                    long initial_profile, long steps, long burn_in = 0);

// True iff the window lies inside sink `sink_id`'s recurrent class: every
// profile belongs to the sink and the sequence is a strict best response path.
bool window_in_rcc(const SBRDContext& ctx, const std::vector<long>& window, int sink_id);
int rcc_of_window(const SBRDContext& ctx, const std::vector<long>& window);

}  // namespace sinkrank
