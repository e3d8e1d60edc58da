#pragma once

#include "sinkrank/game_model.hpp"

namespace sinkrank {

// Strict best response graph over joint strategy profiles. An edge s -> s'
// exists iff s' differs from s in exactly one agent's strategy, that strategy
// is a best response to the opponents, and the deviator's payoff strictly
// improves. With empirical tables the strictness margin widens to
// max(kStrictTol, 3 * combined std_err).
struct SBRGraph {
  long num_nodes = 0;
  std::vector<std::vector<int>> out_edges;   // sorted target lists
  std::vector<std::vector<int>> in_edges;
  std::vector<char> pne;                     // flag per node
  std::vector<std::string> labels;

  bool has_edge(long u, long v) const;
  long num_edges() const;
};

SBRGraph build_sbr_graph(const MetaGame& meta, double tie_tol = kTieTol);

// Graph-only mode: adjacency given directly; PNE := out-degree zero.
SBRGraph graph_from_edges(std::vector<std::string> labels,
                          const std::vector<std::pair<long, long>>& edges);

// Profiles with no strictly improving unilateral deviation.
std::vector<long> pure_nash(const MetaGame& meta);

// Strongly connected components (iterative Tarjan). Component ids follow pop
// order, so for any edge u -> v across components, component[v] < component[u];
// the condensation is therefore acyclic by construction and id order is a
// reverse topological sort.
struct SccResult {
  int num_components = 0;
  std::vector<int> component;                  // per node
  std::vector<std::vector<int>> members;       // per component
};
SccResult strongly_connected_components(const std::vector<std::vector<int>>& adj);

// Sink equilibria: sink components of the condensation. Ids are assigned in
// ascending order of smallest member node; the condensation is asserted
// acyclic during construction.
struct SinkEquilibrium {
  int id = 0;
  std::vector<int> members;                    // sorted node indices
  bool singleton() const { return members.size() == 1; }
};
std::vector<SinkEquilibrium> sink_equilibria(const SBRGraph& graph);

// Membership map: sink id per node, -1 outside every sink.
std::vector<int> sink_membership(const SBRGraph& graph, const std::vector<SinkEquilibrium>& sinks);

// Strict best response path check: every consecutive pair must be an edge, or
// a PNE self-repetition.
bool is_sbrp(const SBRGraph& graph, const std::vector<long>& sequence);

}  // namespace sinkrank
