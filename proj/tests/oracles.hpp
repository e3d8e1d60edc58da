#pragma once

// Slow, independent reference implementations. These deliberately share no
// code with the library routines they check: value iteration vs direct solve,
// cycle enumeration vs the minimum-mean recurrence, walk enumeration vs the
// rolling DP, spanning-tree enumeration vs the contraction algorithm, power
// iteration vs the sparse direct solve.
#include "sinkrank/chain.hpp"
#include "sinkrank/game_model.hpp"
#include "sinkrank/response_graph.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

namespace oracles {

// Fixed-point policy evaluation: V <- R + beta P V until 1e-13 sup change.
inline Eigen::VectorXd value_iteration(const sinkrank::StochasticGame& game,
                                       const sinkrank::JointPolicy& policy, int agent,
                                       int max_iters = 200000) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(game.num_states);
  const double beta = game.discounts[agent];
  for (int it = 0; it < max_iters; ++it) {
    Eigen::VectorXd next(game.num_states);
    for (int x = 0; x < game.num_states; ++x) {
      std::vector<int> a(game.num_agents);
      for (int i = 0; i < game.num_agents; ++i) a[i] = policy.action_for[i][x];
      const int row = game.row_index(x, game.joint_action_index(a));
      next[x] = game.rewards(row, agent) + beta * game.transition.row(row).dot(v);
    }
    const double change = (next - v).cwiseAbs().maxCoeff();
    v = next;
    if (change < 1e-13) break;
  }
  return v;
}

// All simple cycles of the induced subgraph, reported as node lists; the
// smallest node in each cycle is its starting point so each cycle appears
// exactly once.
inline void enumerate_simple_cycles(const sinkrank::SBRGraph& graph, const std::vector<int>& nodes,
                                    const std::function<void(const std::vector<int>&)>& on_cycle) {
  std::vector<char> member(graph.num_nodes, 0);
  for (int v : nodes) member[v] = 1;
  std::vector<char> blocked(graph.num_nodes, 0);
  std::vector<int> path;
  std::function<void(int, int)> dfs = [&](int start, int v) {
    path.push_back(v);
    blocked[v] = 1;
    for (int t : graph.out_edges[v]) {
      if (!member[t] || t < start) continue;
      if (t == start)
        on_cycle(path);
      else if (!blocked[t])
        dfs(start, t);
    }
    blocked[v] = 0;
    path.pop_back();
  };
  for (int s : nodes) dfs(s, s);
}

inline double brute_cycle_metric(const sinkrank::SBRGraph& graph, const std::vector<int>& nodes,
                                 const Eigen::VectorXd& weights) {
  double best = std::numeric_limits<double>::infinity();
  enumerate_simple_cycles(graph, nodes, [&](const std::vector<int>& cycle) {
    double sum = 0.0;
    for (int v : cycle) sum += weights[v];
    best = std::min(best, sum / static_cast<double>(cycle.size()));
  });
  return best;
}

inline int brute_longest_cycle(const sinkrank::SBRGraph& graph, const std::vector<int>& nodes) {
  int best = 0;
  enumerate_simple_cycles(graph, nodes, [&](const std::vector<int>& cycle) {
    best = std::max(best, static_cast<int>(cycle.size()));
  });
  return best;
}

// Every length-m walk inside the sink (with the pure-equilibrium self-loop
// convention for singletons), reported through a callback.
inline void enumerate_walks(const sinkrank::SBRGraph& graph, const std::vector<int>& sink, int m,
                            const std::function<void(const std::vector<int>&)>& on_walk) {
  if (sink.size() == 1 && graph.pne[sink.front()]) {
    on_walk(std::vector<int>(m, sink.front()));
    return;
  }
  std::vector<char> member(graph.num_nodes, 0);
  for (int v : sink) member[v] = 1;
  std::vector<int> walk;
  std::function<void(int)> extend = [&](int v) {
    walk.push_back(v);
    if (static_cast<int>(walk.size()) == m) {
      on_walk(walk);
    } else {
      for (int t : graph.out_edges[v])
        if (member[t]) extend(t);
    }
    walk.pop_back();
  };
  for (int v : sink) extend(v);
}

inline double brute_memory_metric(const sinkrank::SBRGraph& graph, const std::vector<int>& sink,
                                  const Eigen::VectorXd& weights, int m) {
  double best = std::numeric_limits<double>::infinity();
  enumerate_walks(graph, sink, m, [&](const std::vector<int>& walk) {
    double sum = 0.0;
    for (int v : walk) sum += weights[v];
    best = std::min(best, sum / static_cast<double>(m));
  });
  return best;
}

// Minimum-weight spanning in-tree rooted at `root` by brute force over all
// parent functions (every non-root picks one outgoing edge; the result must
// be acyclic). Feasible up to ~7 nodes.
inline double brute_min_in_tree(const sinkrank::ResistanceGraph& rg, long root) {
  const long n = rg.num_windows;
  std::vector<std::vector<std::pair<long, double>>> choices(n);
  for (long v = 0; v < n; ++v)
    if (v != root) choices[v] = rg.out[v];
  std::vector<long> parent(n, -1);
  double best = std::numeric_limits<double>::infinity();
  std::function<void(long, double)> pick = [&](long v, double cost) {
    if (v >= n) {
      // rooted: from every node, following parents reaches root without loops
      for (long s = 0; s < n; ++s) {
        long u = s;
        long hops = 0;
        while (u != root && hops <= n) {
          u = parent[u];
          ++hops;
        }
        if (u != root) return;
      }
      best = std::min(best, cost);
      return;
    }
    if (v == root) {
      pick(v + 1, cost);
      return;
    }
    for (const auto& [t, w] : choices[v]) {
      parent[v] = t;
      pick(v + 1, cost + w);
    }
    parent[v] = -1;
  };
  pick(0, 0.0);
  return best;
}

// Stationary distribution by plain power iteration.
inline Eigen::VectorXd power_iteration(const Eigen::SparseMatrix<double, Eigen::RowMajor>& P,
                                       int iters = 200000, double tol = 1e-14) {
  Eigen::VectorXd pi = Eigen::VectorXd::Constant(P.rows(), 1.0 / static_cast<double>(P.rows()));
  for (int it = 0; it < iters; ++it) {
    Eigen::VectorXd next = P.transpose() * pi;
    next /= next.sum();
    if ((next - pi).cwiseAbs().maxCoeff() < tol) return next;
    pi = next;
  }
  return pi;
}

// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// Random strongly connected digraph on n nodes: a random Hamiltonian cycle
// plus independent extra edges.
inline sinkrank::SBRGraph random_sscc(std::mt19937_64& rng, int n, double extra_p = 0.3) {
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::pair<long, long>> edges;
  for (int i = 0; i < n; ++i) edges.emplace_back(order[i], order[(i + 1) % n]);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      if (a != b && u(rng) < extra_p) edges.emplace_back(a, b);
  std::vector<std::string> labels;
  for (int i = 0; i < n; ++i) labels.push_back("n" + std::to_string(i));
  return sinkrank::graph_from_edges(labels, edges);
}

}  // namespace oracles
