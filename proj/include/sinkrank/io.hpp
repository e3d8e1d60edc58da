#pragma once

#include "sinkrank/chain.hpp"
#include "sinkrank/metrics.hpp"

#include <map>

namespace sinkrank {

inline constexpr const char* kFormatTag = "sinkrank-v1";
inline constexpr const char* kToolVersion = "0.1.0";

// Stochastic game and meta-game files ("format": "sinkrank-v1").
StochasticGame load_game(const std::string& path);
std::string game_to_json(const StochasticGame& game);
void save_game(const StochasticGame& game, const std::string& path);

MetaGame load_meta(const std::string& path);
std::string meta_to_json(const MetaGame& meta);
void save_meta(const MetaGame& meta, const std::string& path);

// Graph-only input: node list, edge list, optional node weights.
struct GraphFile {
  SBRGraph graph;
  Eigen::VectorXd weights;    // empty when absent
  bool has_weights = false;
};
GraphFile load_graph(const std::string& path);
std::string graph_to_json(const SBRGraph& graph, const Eigen::VectorXd* weights = nullptr);
void save_graph(const SBRGraph& graph, const std::string& path, const Eigen::VectorXd* weights = nullptr);

// Either input accepted by graph-consuming commands.
struct LoadedInput {
  std::optional<MetaGame> meta;
  SBRGraph graph;
  Eigen::VectorXd node_weights;   // W per node (meta: weighted performance)
};
LoadedInput load_input(const std::string& path, const Eigen::VectorXd& agent_weights);

// DOT export; sinks get filled nodes, one color class per sink.
std::string to_dot(const SBRGraph& graph, const std::vector<SinkEquilibrium>& sinks);

// Run manifest embedded in every artifact. The timestamp honors
// SOURCE_DATE_EPOCH so reruns can be bit-identical.
struct RunManifest {
  std::string command;
  std::string input_digest;            // FNV-1a 64 of the input bytes, hex
  std::map<std::string, std::string> flags;
  std::uint64_t seed = 0;
  std::string version = kToolVersion;
  std::string timestamp;
};
std::uint64_t fnv1a64(const std::string& bytes);
std::string digest_file(const std::string& path);
RunManifest make_manifest(const std::string& command, const std::string& input_path,
                          std::map<std::string, std::string> flags, std::uint64_t seed);
std::string manifest_to_json(const RunManifest& mf);

// CSV artifacts carry the manifest as a leading '#' comment line.
std::string ranking_csv(const std::vector<RankedProfile>& rows, const RunManifest& mf);
std::string occupancy_csv(const MetaGame& meta, const std::vector<int>& sink_of,
                          const Eigen::VectorXd& visits, const RunManifest& mf);

void write_text(const std::string& path, const std::string& content);
std::string read_text(const std::string& path);

}  // namespace sinkrank
