#include "sinkrank/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sinkrank {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

Eigen::VectorXd uniform_weights(int n) {
  return Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
}

void validate_weights(const Eigen::VectorXd& w, int n) {
  if (w.size() != n) throw std::runtime_error("weights: size mismatch");
  if (w.minCoeff() < 0.0) throw std::runtime_error("weights: negative entry");
  if (std::abs(w.sum() - 1.0) > 1e-12) throw std::runtime_error("weights: must sum to one");
}

Eigen::VectorXd performance(const MetaGame& meta, const Eigen::VectorXd& weights) {
  validate_weights(weights, meta.num_agents);
  return meta.payoffs * weights;
}

double path_performance(const Eigen::VectorXd& node_weights, const std::vector<long>& path) {
  if (path.empty()) throw std::runtime_error("path_performance: empty path");
  double sum = 0.0;
  for (long v : path) sum += node_weights[v];
  return sum / static_cast<double>(path.size());
}

namespace {

// Local adjacency of the subgraph induced by `nodes`.
struct Induced {
  std::vector<int> nodes;                      // local -> global
  std::vector<std::vector<int>> out;           // local edges
  std::vector<std::vector<int>> in;
};

Induced induce(const SBRGraph& graph, const std::vector<int>& nodes) {
  Induced sub;
  sub.nodes = nodes;
  std::vector<int> local(graph.num_nodes, -1);
  for (size_t i = 0; i < nodes.size(); ++i) local[nodes[i]] = static_cast<int>(i);
  sub.out.resize(nodes.size());
  sub.in.resize(nodes.size());
  for (size_t i = 0; i < nodes.size(); ++i) {
    for (int t : graph.out_edges[nodes[i]]) {
      if (local[t] < 0) continue;
      sub.out[i].push_back(local[t]);
      sub.in[local[t]].push_back(static_cast<int>(i));
    }
  }
  return sub;
}

}  // namespace

int max_cycle_length_bound(const SBRGraph& graph, const std::vector<int>& nodes, int exact_cap) {
  const int k = static_cast<int>(nodes.size());
  if (k > exact_cap || k > 16) return k;
  Induced sub = induce(graph, nodes);
  int best = 0;
  // For each start (lowest node on the cycle), bitmask DP over nodes >= start.
  for (int start = 0; start < k; ++start) {
    const int width = k - start;
    const int nmask = 1 << width;
    std::vector<std::uint32_t> reach(nmask, 0);   // bit v-start: path start..v over mask
    reach[1] = 1u;
    for (int mask = 1; mask < nmask; ++mask) {
      if (!(mask & 1) || !reach[mask]) continue;
      for (int vo = 0; vo < width; ++vo) {
        if (!(reach[mask] >> vo & 1u)) continue;
        const int v = start + vo;
        for (int t : sub.out[v]) {
          if (t < start) continue;
          const int to = t - start;
          if (mask >> to & 1) {
            if (t == start) best = std::max(best, __builtin_popcount(mask));
          } else {
            reach[mask | (1 << to)] |= 1u << to;
          }
        }
      }
    }
  }
  return best;
}

double cycle_metric(const SBRGraph& graph, const std::vector<int>& sink,
                    const Eigen::VectorXd& node_weights) {
  if (sink.empty()) throw std::runtime_error("cycle_metric: empty sink");
  if (sink.size() == 1) return node_weights[sink.front()];
  Induced sub = induce(graph, sink);
  const int k = static_cast<int>(sink.size());
  // Karp: D[t][v] = min weight of a walk with exactly t edges from node 0 to v,
  // edge (u, v) carrying the head's node weight, so cycle means equal node means.
  std::vector<std::vector<double>> D(k + 1, std::vector<double>(k, kInf));
  D[0][0] = 0.0;
  for (int t = 1; t <= k; ++t)
    for (int v = 0; v < k; ++v)
      for (int u : sub.in[v])
        if (D[t - 1][u] < kInf)
          D[t][v] = std::min(D[t][v], D[t - 1][u] + node_weights[sub.nodes[v]]);
  double lambda = kInf;
  for (int v = 0; v < k; ++v) {
    if (D[k][v] == kInf) continue;
    double worst = -kInf;
    for (int j = 0; j < k; ++j)
      if (D[j][v] < kInf)
        worst = std::max(worst, (D[k][v] - D[j][v]) / static_cast<double>(k - j));
    lambda = std::min(lambda, worst);
  }
  if (lambda == kInf) throw std::logic_error("cycle_metric: sink contains no cycle");
  return lambda;
}

double memory_metric(const SBRGraph& graph, const std::vector<int>& sink,
                     const Eigen::VectorXd& node_weights, int m) {
  if (sink.empty()) throw std::runtime_error("memory_metric: empty sink");
  if (m < 1) throw std::runtime_error("memory_metric: m must be >= 1");
  if (sink.size() == 1) return node_weights[sink.front()];   // PNE self-repetition
  Induced sub = induce(graph, sink);
  const int k = static_cast<int>(sink.size());
  std::vector<double> cur(k), prev(k);
  for (int v = 0; v < k; ++v) prev[v] = node_weights[sub.nodes[v]];
  for (int t = 2; t <= m; ++t) {
    for (int v = 0; v < k; ++v) {
      double best = kInf;
      for (int u : sub.in[v]) best = std::min(best, prev[u]);
      cur[v] = best + node_weights[sub.nodes[v]];
    }
    std::swap(cur, prev);
  }
  const double best = *std::min_element(prev.begin(), prev.end());
  if (!(best < kInf)) throw std::logic_error("memory_metric: no walk of requested length");
  return best / static_cast<double>(m);
}

MetricReport evaluate_metric(const SBRGraph& graph, const std::vector<SinkEquilibrium>& sinks,
                             const Eigen::VectorXd& node_weights, MetricKind kind, int m) {
  MetricReport report;
  report.kind = kind;
  report.m = m;
  report.per_profile = Eigen::VectorXd::Zero(graph.num_nodes);
  report.sink_of = sink_membership(graph, sinks);
  for (const auto& q : sinks) {
    const double value = kind == MetricKind::kCycle
                             ? cycle_metric(graph, q.members, node_weights)
                             : memory_metric(graph, q.members, node_weights, m);
    report.per_sink.push_back(value);
    report.cycle_length_bound.push_back(max_cycle_length_bound(graph, q.members));
    for (int v : q.members) report.per_profile[v] = value;
  }
  return report;
}

std::vector<RankedProfile> rank_profiles(const SBRGraph& graph,
                                         const std::vector<SinkEquilibrium>& sinks,
                                         const Eigen::VectorXd& node_weights, MetricKind kind,
                                         int m) {
  MetricReport report = evaluate_metric(graph, sinks, node_weights, kind, m);
  std::vector<RankedProfile> rows(graph.num_nodes);
  for (long v = 0; v < graph.num_nodes; ++v) {
    rows[v].profile = v;
    rows[v].label = graph.labels[v];
    rows[v].sink_id = report.sink_of[v];
    rows[v].metric = report.per_profile[v];
    rows[v].performance = node_weights[v];
  }
  std::stable_sort(rows.begin(), rows.end(), [](const RankedProfile& a, const RankedProfile& b) {
    if (a.metric != b.metric) return a.metric > b.metric;
    return a.profile < b.profile;
  });
  return rows;
}

}  // namespace sinkrank
