#pragma once

#include "sinkrank/response_graph.hpp"

namespace sinkrank {

constexpr int kCycleExactCap = 12;   // exact longest-cycle search limit

// Convex agent weights. Throws unless nonnegative and summing to 1 within 1e-12.
Eigen::VectorXd uniform_weights(int n);
void validate_weights(const Eigen::VectorXd& w, int n);

// Joint performance W(s) = sum_i w_i J^i(s), evaluated for every profile.
Eigen::VectorXd performance(const MetaGame& meta, const Eigen::VectorXd& weights);

// Mean performance along a node sequence.
double path_performance(const Eigen::VectorXd& node_weights, const std::vector<long>& path);

// Longest simple cycle length in the subgraph induced by `nodes`; exact via
// bitmask DP when |nodes| <= exact_cap, otherwise the bound |nodes|.
int max_cycle_length_bound(const SBRGraph& graph, const std::vector<int>& nodes,
                           int exact_cap = kCycleExactCap);

// Cycle-based metric of one sink: minimum over directed cycles of the mean
// node performance (Karp); W(s) for singleton sinks.
double cycle_metric(const SBRGraph& graph, const std::vector<int>& sink,
                    const Eigen::VectorXd& node_weights);

// Memory-based metric of one sink: minimum over length-m strict best response
// walks inside the sink of mean node performance (DP over (node, step)).
double memory_metric(const SBRGraph& graph, const std::vector<int>& sink,
                     const Eigen::VectorXd& node_weights, int m);

enum class MetricKind { kCycle, kMemory };

// Full metric evaluation: per-sink values and per-profile values (profiles
// outside every sink score 0).
struct MetricReport {
  MetricKind kind = MetricKind::kCycle;
  int m = 1;                                  // memory length (memory kind)
  Eigen::VectorXd per_profile;
  std::vector<double> per_sink;
  std::vector<int> cycle_length_bound;        // per sink
  std::vector<int> sink_of;                   // per profile, -1 outside sinks
};
MetricReport evaluate_metric(const SBRGraph& graph, const std::vector<SinkEquilibrium>& sinks,
                             const Eigen::VectorXd& node_weights, MetricKind kind, int m = 1);

// Ranking rows, sorted by metric descending, ties broken by profile index.
struct RankedProfile {
  long profile = 0;
  std::string label;
  int sink_id = -1;       // -1 outside sinks
  double metric = 0.0;
  double performance = 0.0;
};
std::vector<RankedProfile> rank_profiles(const SBRGraph& graph,
                                         const std::vector<SinkEquilibrium>& sinks,
                                         const Eigen::VectorXd& node_weights, MetricKind kind,
                                         int m = 1);

}  // namespace sinkrank
