#include "sinkrank/response_graph.hpp"

#include <algorithm>
#include <cmath>

namespace sinkrank {

bool SBRGraph::has_edge(long u, long v) const {
  const auto& row = out_edges[u];
  return std::binary_search(row.begin(), row.end(), static_cast<int>(v));
}

long SBRGraph::num_edges() const {
  long k = 0;
  for (const auto& row : out_edges) k += static_cast<long>(row.size());
  return k;
}

namespace {

// Strictness margin: fixed tolerance for exact tables, widened to three
// combined standard errors for empirical ones.
double margin(const MetaGame& meta, long s1, long s2, int agent, double base_tol) {
  if (!meta.empirical()) return base_tol;
  const double se1 = meta.payoff_stderr(s1, agent);
  const double se2 = meta.payoff_stderr(s2, agent);
  return std::max(base_tol, 3.0 * std::sqrt(se1 * se1 + se2 * se2));
}

std::vector<int> br_set(const MetaGame& meta, int agent, const std::vector<int>& profile,
                        double tie_tol) {
  std::vector<int> probe = profile;
  const int k = meta.strategy_count(agent);
  std::vector<long> idx(k);
  Eigen::VectorXd val(k);
  for (int a = 0; a < k; ++a) {
    probe[agent] = a;
    idx[a] = meta.encode(probe);
    val[a] = meta.payoffs(idx[a], agent);
  }
  int arg = 0;
  for (int a = 1; a < k; ++a)
    if (val[a] > val[arg]) arg = a;
  std::vector<int> out;
  for (int a = 0; a < k; ++a)
    if (val[a] >= val[arg] - margin(meta, idx[a], idx[arg], agent, tie_tol)) out.push_back(a);
  return out;
}

}  // namespace

SBRGraph build_sbr_graph(const MetaGame& meta, double tie_tol) {
  meta.validate();
  const long np = meta.num_profiles();
  SBRGraph g;
  g.num_nodes = np;
  g.out_edges.resize(np);
  g.in_edges.resize(np);
  g.pne.assign(np, 1);
  g.labels.resize(np);
  for (long s = 0; s < np; ++s) {
    g.labels[s] = meta.profile_label(s);
    const auto profile = meta.decode(s);
    for (int i = 0; i < meta.num_agents; ++i) {
      auto deviate = profile;
      for (int b : br_set(meta, i, profile, tie_tol)) {
        if (b == profile[i]) continue;
        deviate[i] = b;
        const long t = meta.encode(deviate);
        const double gain = meta.payoffs(t, i) - meta.payoffs(s, i);
        if (gain > margin(meta, t, s, i, kStrictTol)) {
          g.out_edges[s].push_back(static_cast<int>(t));
          g.in_edges[t].push_back(static_cast<int>(s));
          g.pne[s] = 0;
        }
      }
      deviate[i] = profile[i];
    }
  }
  for (auto& row : g.out_edges) std::sort(row.begin(), row.end());
  for (auto& row : g.in_edges) std::sort(row.begin(), row.end());
  return g;
}

SBRGraph graph_from_edges(std::vector<std::string> labels,
                          const std::vector<std::pair<long, long>>& edges) {
  SBRGraph g;
  g.num_nodes = static_cast<long>(labels.size());
  g.labels = std::move(labels);
  g.out_edges.resize(g.num_nodes);
  g.in_edges.resize(g.num_nodes);
  for (auto [u, v] : edges) {
    if (u < 0 || u >= g.num_nodes || v < 0 || v >= g.num_nodes)
      throw std::runtime_error("graph: edge endpoint out of range");
    if (u == v) throw std::runtime_error("graph: self-loops are not permitted");
    g.out_edges[u].push_back(static_cast<int>(v));
    g.in_edges[v].push_back(static_cast<int>(u));
  }
  for (auto& row : g.out_edges) {
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
  }
  for (auto& row : g.in_edges) {
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
  }
  g.pne.assign(g.num_nodes, 0);
  for (long v = 0; v < g.num_nodes; ++v) g.pne[v] = g.out_edges[v].empty() ? 1 : 0;
  return g;
}

std::vector<long> pure_nash(const MetaGame& meta) {
  std::vector<long> out;
  const long np = meta.num_profiles();
  for (long s = 0; s < np; ++s) {
    const auto profile = meta.decode(s);
    bool pne = true;
    for (int i = 0; i < meta.num_agents && pne; ++i) {
      auto deviate = profile;
      for (int a = 0; a < meta.strategy_count(i) && pne; ++a) {
        if (a == profile[i]) continue;
        deviate[i] = a;
        const long t = meta.encode(deviate);
        if (meta.payoffs(t, i) - meta.payoffs(s, i) > margin(meta, t, s, i, kStrictTol)) pne = false;
      }
    }
    if (pne) out.push_back(s);
  }
  return out;
}

SccResult strongly_connected_components(const std::vector<std::vector<int>>& adj) {
  const int n = static_cast<int>(adj.size());
  SccResult res;
  res.component.assign(n, -1);
  std::vector<int> index(n, -1), low(n, 0);
  std::vector<char> on_stack(n, 0);
  std::vector<int> stack;
  // Explicit DFS frames: (node, next child position).
  std::vector<std::pair<int, size_t>> frames;
  int next_index = 0;
  for (int root = 0; root < n; ++root) {
    if (index[root] != -1) continue;
    frames.emplace_back(root, 0);
    while (!frames.empty()) {
      auto& [v, child] = frames.back();
      if (child == 0) {
        index[v] = low[v] = next_index++;
        stack.push_back(v);
        on_stack[v] = 1;
      }
      bool descended = false;
      while (child < adj[v].size()) {
        const int w = adj[v][child++];
        if (index[w] == -1) {
          frames.emplace_back(w, 0);
          descended = true;
          break;
        }
        if (on_stack[w]) low[v] = std::min(low[v], index[w]);
      }
      if (descended) continue;
      if (low[v] == index[v]) {
        res.members.emplace_back();
        int w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          res.component[w] = res.num_components;
          res.members.back().push_back(w);
        } while (w != v);
        std::sort(res.members.back().begin(), res.members.back().end());
        ++res.num_components;
      }
      const int done = v;
      frames.pop_back();
      if (!frames.empty()) {
        const int parent = frames.back().first;
        low[parent] = std::min(low[parent], low[done]);
      }
    }
  }
  return res;
}

std::vector<SinkEquilibrium> sink_equilibria(const SBRGraph& graph) {
  SccResult scc = strongly_connected_components(graph.out_edges);
  std::vector<char> has_out(scc.num_components, 0);
  for (long u = 0; u < graph.num_nodes; ++u) {
    for (int v : graph.out_edges[u]) {
      const int cu = scc.component[u], cv = scc.component[v];
      if (cu == cv) continue;
      if (cv >= cu) throw std::logic_error("sink_equilibria: condensation is not acyclic");
      has_out[cu] = 1;
    }
  }
  std::vector<SinkEquilibrium> sinks;
  for (int c = 0; c < scc.num_components; ++c)
    if (!has_out[c]) sinks.push_back({0, scc.members[c]});
  std::sort(sinks.begin(), sinks.end(),
            [](const SinkEquilibrium& a, const SinkEquilibrium& b) {
              return a.members.front() < b.members.front();
            });
  for (size_t i = 0; i < sinks.size(); ++i) sinks[i].id = static_cast<int>(i);
  if (sinks.empty()) throw std::logic_error("sink_equilibria: no sink component found");
  return sinks;
}

std::vector<int> sink_membership(const SBRGraph& graph, const std::vector<SinkEquilibrium>& sinks) {
  std::vector<int> sink_of(graph.num_nodes, -1);
  for (const auto& q : sinks)
    for (int v : q.members) sink_of[v] = q.id;
  return sink_of;
}

bool is_sbrp(const SBRGraph& graph, const std::vector<long>& sequence) {
  for (long v : sequence)
    if (v < 0 || v >= graph.num_nodes) throw std::out_of_range("is_sbrp: node out of range");
  for (size_t t = 0; t + 1 < sequence.size(); ++t) {
    const long a = sequence[t], b = sequence[t + 1];
    if (graph.has_edge(a, b)) continue;
    if (graph.pne[a] && a == b) continue;
    return false;
  }
  return true;
}

}  // namespace sinkrank
