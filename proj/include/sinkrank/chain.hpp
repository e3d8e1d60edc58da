#pragma once

#include "sinkrank/sbrd.hpp"

#include <Eigen/SparseCore>
#include <optional>

namespace sinkrank {

constexpr long kDefaultStateCap = 20000;       // SINKRANK_STATE_CAP overrides
constexpr double kStationaryResidualTol = 1e-10;
inline const std::vector<double> kDefaultEpsGrid = {1e-1, 3e-2, 1e-2, 3e-3, 1e-3};

long state_cap_from_env();

// Exact Markov chain of the perturbed dynamics over all |S|^m windows.
// Window index: mixed radix over profile ids, oldest slot most significant,
// so append(h, s) = (h mod |S|^(m-1)) * |S| + s.
struct HistoryChain {
  int m = 1;
  double epsilon = 0.0;
  long num_profiles = 0;
  long num_windows = 0;
  Eigen::SparseMatrix<double, Eigen::RowMajor> P;
  std::vector<double> kappa;                   // per window

  long append(long h, long profile) const;
  std::vector<long> window_of(long h) const;
  long index_of(const std::vector<long>& window) const;
};

HistoryChain enumerate_history_chain(const MetaGame& meta, int m, double epsilon,
                                     const FeasibleFunction& f, double tie_tol = kTieTol,
                                     long state_cap = -1);

// Stationary distribution of a row-stochastic matrix by direct sparse solve.
// Requires a unique stationary vector; the residual ||pi^T P - pi^T||_inf must
// meet kStationaryResidualTol or the call throws.
Eigen::VectorXd stationary_distribution(const Eigen::SparseMatrix<double, Eigen::RowMajor>& P);

// Minimum explorations needed to append `to` after profile `from` (strategy
// coins plus the history coin), minimized over the selected agent. Range
// {0, ..., n+1}.
int exploration_number(const MetaGame& meta, long from, long to, double tie_tol = kTieTol);

// Resistance graph over windows: r(h, h') = exploration_number * kappa(h) on
// append transitions, plus stay self-loops; pairs with no transition are
// absent (infinite resistance).
struct ResistanceGraph {
  int m = 1;
  long num_windows = 0;
  std::vector<std::vector<std::pair<long, double>>> out;   // (target, resistance)
  std::vector<double> kappa;
  double resistance(long h, long g) const;                 // +inf when absent
};
ResistanceGraph resistance_graph(const MetaGame& meta, int m, const FeasibleFunction& f,
                                 double tie_tol = kTieTol, long state_cap = -1);

// Stochastic potential: minimum total resistance over spanning in-trees rooted
// at h (Chu-Liu/Edmonds on the reversed graph). Returns +inf if some window
// cannot reach h.
double stochastic_potential(const ResistanceGraph& rg, long root);

// Recurrent classes: all length-m strict best response walks confined to one
// sink. Enumeration is capped; the windows are returned as profile sequences.
std::vector<std::vector<long>> rcc_of_sink(const SBRGraph& graph, const std::vector<int>& sink,
                                           int m, long cap = 200000);

// Minimum window performance over a sink's recurrent class, computed by the
// same DP as the memory metric (no enumeration).
double rcc_min_performance(const SBRGraph& graph, const std::vector<int>& sink,
                           const Eigen::VectorXd& node_weights, int m);

struct StabilityReport {
  int m = 1;
  double delta = 0.0;
  long num_windows = 0;
  std::vector<std::vector<long>> rcc_windows;        // window indices per sink
  std::vector<double> gamma;                         // per window; full table or RCC-only
  bool full_gamma_table = false;
  double min_gamma = 0.0;
  std::vector<long> stable_windows;                  // argmin gamma (within 1e-9)
  std::vector<long> stable_profiles;                 // profiles recorded in stable windows
  std::vector<int> stable_sinks;                     // sinks holding stable windows
  std::vector<double> gamma_bar;                     // per sink
  std::vector<double> eps_grid;
  std::vector<Eigen::VectorXd> pi;                   // per grid point
  Eigen::VectorXd pi_limit;                          // smallest-eps solution
  std::vector<double> tv_successive;
  Eigen::VectorXd profile_mass_limit;                // window mass mapped to last-recorded profile
};
StabilityReport stochastically_stable(const MetaGame& meta, int m, const FeasibleFunction& f,
                                      const std::vector<double>& eps_grid = kDefaultEpsGrid,
                                      double tie_tol = kTieTol, long gamma_table_cap = 2000);

// Headline guarantees, checked end to end on a concrete instance.
//   kCycleExact:   metric gap delta0 given; stable set must equal the
//                  max-metric recurrent class (memory bound 2*L*Jmax/(delta0-delta)).
//   kMemoryExact:  same conclusion for the memory metric, no memory bound.
//   kCycleApprox:  only delta_bar given; surviving profiles must be within
//                  delta_bar of the best cycle metric (bound 2*L*Jmax/(delta_bar-delta)).
//   kMemoryApprox: approximate conclusion for the memory metric.
enum class VerifyMode { kCycleExact, kMemoryExact, kCycleApprox, kMemoryApprox };

struct VerifyReport {
  VerifyMode mode = VerifyMode::kCycleExact;
  bool preconditions_ok = false;
  std::vector<std::string> precondition_failures;
  bool conclusion_ok = false;
  std::vector<std::string> notes;
  double j_max = 0.0;
  int cycle_bound = 1;
  std::vector<double> sink_metric;
  int best_sink = -1;
  double required_m = 0.0;
  StabilityReport stability;
  int exit_code() const { return preconditions_ok ? (conclusion_ok ? 0 : 1) : 2; }
};
struct VerifyOptions {
  VerifyMode mode = VerifyMode::kCycleExact;
  double delta = 0.1;
  std::optional<double> delta0;
  std::optional<double> delta_bar;
  int m = 2;
  double base = 0.0;                                 // 0: default
  Eigen::VectorXd weights;                           // empty: uniform
  std::vector<double> eps_grid = kDefaultEpsGrid;
  double mass_threshold = 1e-3;
};
VerifyReport verify_guarantees(const MetaGame& meta, const VerifyOptions& opt);

}  // namespace sinkrank
