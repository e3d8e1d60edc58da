#include "sinkrank/io.hpp"

#include "json.hpp"

#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>

namespace sinkrank {

using nlohmann::json;

namespace {

json parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  if (!j.is_object()) throw std::runtime_error(path + ": top level must be an object");
  if (!j.contains("format") || j["format"] != kFormatTag)
    throw std::runtime_error(path + ": missing or unsupported \"format\" (expected \"" +
                             std::string(kFormatTag) + "\")");
  return j;
}

const json& field(const json& j, const std::string& path, const char* name) {
  if (!j.contains(name)) throw std::runtime_error(path + ": missing \"" + name + "\"");
  return j[name];
}

Eigen::MatrixXd matrix_field(const json& j, const std::string& path, const char* name,
                             long rows, long cols) {
  const json& a = field(j, path, name);
  if (!a.is_array() || static_cast<long>(a.size()) != rows)
    throw std::runtime_error(path + ": \"" + name + "\" must have " + std::to_string(rows) +
                             " rows");
  Eigen::MatrixXd out(rows, cols);
  for (long r = 0; r < rows; ++r) {
    const json& row = a[r];
    if (!row.is_array() || static_cast<long>(row.size()) != cols)
      throw std::runtime_error(path + ": \"" + name + "\" row " + std::to_string(r) +
                               " must have " + std::to_string(cols) + " entries");
    for (long c = 0; c < cols; ++c) out(r, c) = row[c].get<double>();
  }
  return out;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (long r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (long c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

// Nested payoff tensor: index by each agent's strategy in turn, innermost is
// the per-agent payoff vector.
void fill_payoffs(const json& node, const std::string& path, const MetaGame& meta,
                  std::vector<int>& idx, int depth, Eigen::MatrixXd& payoffs) {
  if (depth == meta.num_agents) {
    if (!node.is_array() || static_cast<int>(node.size()) != meta.num_agents)
      throw std::runtime_error(path + ": payoff entry must list " +
                               std::to_string(meta.num_agents) + " values");
    const long s = meta.encode(idx);
    for (int i = 0; i < meta.num_agents; ++i) payoffs(s, i) = node[i].get<double>();
    return;
  }
  const int k = meta.strategy_count(depth);
  if (!node.is_array() || static_cast<int>(node.size()) != k)
    throw std::runtime_error(path + ": payoff nesting at depth " + std::to_string(depth) +
                             " must have " + std::to_string(k) + " entries");
  for (int a = 0; a < k; ++a) {
    idx[depth] = a;
    fill_payoffs(node[a], path, meta, idx, depth + 1, payoffs);
  }
}

json payoffs_to_json(const MetaGame& meta, const Eigen::MatrixXd& table, std::vector<int>& idx,
                     int depth) {
  if (depth == meta.num_agents) {
    json cell = json::array();
    const long s = meta.encode(idx);
    for (int i = 0; i < meta.num_agents; ++i) cell.push_back(table(s, i));
    return cell;
  }
  json level = json::array();
  for (int a = 0; a < meta.strategy_count(depth); ++a) {
    idx[depth] = a;
    level.push_back(payoffs_to_json(meta, table, idx, depth + 1));
  }
  return level;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string format_double(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

}  // namespace

StochasticGame load_game(const std::string& path) {
  const json j = parse_file(path);
  StochasticGame game;
  game.num_agents = field(j, path, "agents").get<int>();
  for (const auto& s : field(j, path, "states")) game.state_names.push_back(s.get<std::string>());
  game.num_states = static_cast<int>(game.state_names.size());
  for (const auto& acts : field(j, path, "actions")) {
    game.action_names.emplace_back();
    for (const auto& a : acts) game.action_names.back().push_back(a.get<std::string>());
    game.num_actions.push_back(static_cast<int>(game.action_names.back().size()));
  }
  if (static_cast<int>(game.num_actions.size()) != game.num_agents)
    throw std::runtime_error(path + ": \"actions\" must list one action set per agent");
  const long rows = static_cast<long>(game.num_states) * game.num_joint_actions();
  game.transition = matrix_field(j, path, "transition", rows, game.num_states);
  game.rewards = matrix_field(j, path, "rewards", rows, game.num_agents);
  const json& disc = field(j, path, "discounts");
  game.discounts.resize(game.num_agents);
  if (static_cast<int>(disc.size()) != game.num_agents)
    throw std::runtime_error(path + ": \"discounts\" must list one value per agent");
  for (int i = 0; i < game.num_agents; ++i) game.discounts[i] = disc[i].get<double>();
  try {
    game.validate();
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  return game;
}

std::string game_to_json(const StochasticGame& game) {
  json j;
  j["format"] = kFormatTag;
  j["agents"] = game.num_agents;
  j["states"] = game.state_names;
  j["actions"] = game.action_names;
  j["transition"] = matrix_to_json(game.transition);
  j["rewards"] = matrix_to_json(game.rewards);
  json disc = json::array();
  for (int i = 0; i < game.num_agents; ++i) disc.push_back(game.discounts[i]);
  j["discounts"] = disc;
  return j.dump(2) + "\n";
}

void save_game(const StochasticGame& game, const std::string& path) {
  write_text(path, game_to_json(game));
}

MetaGame load_meta(const std::string& path) {
  const json j = parse_file(path);
  MetaGame meta;
  meta.num_agents = field(j, path, "agents").get<int>();
  for (const auto& strat : field(j, path, "strategies")) {
    meta.strategy_names.emplace_back();
    for (const auto& s : strat) meta.strategy_names.back().push_back(s.get<std::string>());
  }
  if (static_cast<int>(meta.strategy_names.size()) != meta.num_agents)
    throw std::runtime_error(path + ": \"strategies\" must list one set per agent");
  meta.payoffs.resize(meta.num_profiles(), meta.num_agents);
  std::vector<int> idx(meta.num_agents, 0);
  fill_payoffs(field(j, path, "payoffs"), path, meta, idx, 0, meta.payoffs);
  if (j.contains("payoff_stderr")) {
    meta.payoff_stderr.resize(meta.num_profiles(), meta.num_agents);
    fill_payoffs(j["payoff_stderr"], path, meta, idx, 0, meta.payoff_stderr);
  }
  try {
    meta.validate();
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  return meta;
}

std::string meta_to_json(const MetaGame& meta) {
  json j;
  j["format"] = kFormatTag;
  j["agents"] = meta.num_agents;
  j["strategies"] = meta.strategy_names;
  std::vector<int> idx(meta.num_agents, 0);
  j["payoffs"] = payoffs_to_json(meta, meta.payoffs, idx, 0);
  if (meta.empirical()) j["payoff_stderr"] = payoffs_to_json(meta, meta.payoff_stderr, idx, 0);
  return j.dump(2) + "\n";
}

void save_meta(const MetaGame& meta, const std::string& path) {
  write_text(path, meta_to_json(meta));
}

GraphFile load_graph(const std::string& path) {
  const json j = parse_file(path);
  std::vector<std::string> labels;
  for (const auto& nd : field(j, path, "nodes")) labels.push_back(nd.get<std::string>());
  std::vector<std::pair<long, long>> edges;
  for (const auto& e : field(j, path, "edges")) {
    if (!e.is_array() || e.size() != 2)
      throw std::runtime_error(path + ": each edge must be a [from, to] pair");
    edges.emplace_back(e[0].get<long>(), e[1].get<long>());
  }
  GraphFile out;
  try {
    out.graph = graph_from_edges(labels, edges);
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  if (j.contains("weights")) {
    const json& w = j["weights"];
    if (static_cast<int>(w.size()) != out.graph.num_nodes)
      throw std::runtime_error(path + ": \"weights\" must list one value per node");
    out.weights.resize(out.graph.num_nodes);
    for (int v = 0; v < out.graph.num_nodes; ++v) out.weights[v] = w[v].get<double>();
    out.has_weights = true;
  }
  return out;
}

std::string graph_to_json(const SBRGraph& graph, const Eigen::VectorXd* weights) {
  json j;
  j["format"] = kFormatTag;
  j["nodes"] = graph.labels;
  json edges = json::array();
  for (int v = 0; v < graph.num_nodes; ++v)
    for (int t : graph.out_edges[v]) edges.push_back(json::array({v, t}));
  j["edges"] = edges;
  if (weights) {
    json w = json::array();
    for (long v = 0; v < weights->size(); ++v) w.push_back((*weights)[v]);
    j["weights"] = w;
  }
  return j.dump(2) + "\n";
}

void save_graph(const SBRGraph& graph, const std::string& path, const Eigen::VectorXd* weights) {
  write_text(path, graph_to_json(graph, weights));
}

LoadedInput load_input(const std::string& path, const Eigen::VectorXd& agent_weights) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  LoadedInput out;
  if (j.contains("transition")) {
    StochasticGame game = load_game(path);
    out.meta = MetaGame::from_game(game);
  } else if (j.contains("payoffs")) {
    out.meta = load_meta(path);
  } else if (j.contains("edges")) {
    GraphFile gf = load_graph(path);
    out.graph = std::move(gf.graph);
    out.node_weights = gf.has_weights ? gf.weights : Eigen::VectorXd::Zero(out.graph.num_nodes);
    return out;
  } else {
    throw std::runtime_error(path + ": expected a game, meta-game, or graph file");
  }
  Eigen::VectorXd w = agent_weights.size() ? agent_weights : uniform_weights(out.meta->num_agents);
  validate_weights(w, out.meta->num_agents);
  out.graph = build_sbr_graph(*out.meta);
  out.node_weights = performance(*out.meta, w);
  return out;
}

std::string to_dot(const SBRGraph& graph, const std::vector<SinkEquilibrium>& sinks) {
  static const char* kPalette[] = {"#8dd3c7", "#ffffb3", "#bebada", "#fb8072",
                                   "#80b1d3", "#fdb462", "#b3de69", "#fccde5"};
  std::vector<int> sink_of = sink_membership(graph, sinks);
  std::ostringstream os;
  os << "digraph sbr {\n  rankdir=LR;\n  node [shape=ellipse];\n";
  for (int v = 0; v < graph.num_nodes; ++v) {
    os << "  n" << v << " [label=\"" << graph.labels[v] << "\"";
    if (sink_of[v] >= 0)
      os << ", style=filled, fillcolor=\"" << kPalette[sink_of[v] % 8] << "\"";
    if (graph.pne[v]) os << ", peripheries=2";
    os << "];\n";
  }
  for (int v = 0; v < graph.num_nodes; ++v)
    for (int t : graph.out_edges[v]) os << "  n" << v << " -> n" << t << ";\n";
  os << "}\n";
  return os.str();
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string digest_file(const std::string& path) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << fnv1a64(read_text(path));
  return os.str();
}

RunManifest make_manifest(const std::string& command, const std::string& input_path,
                          std::map<std::string, std::string> flags, std::uint64_t seed) {
  RunManifest mf;
  mf.command = command;
  mf.input_digest = input_path.empty() ? "" : digest_file(input_path);
  mf.flags = std::move(flags);
  mf.seed = seed;
  std::time_t t = std::time(nullptr);
  if (const char* env = std::getenv("SOURCE_DATE_EPOCH")) t = std::atol(env);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  mf.timestamp = buf;
  return mf;
}

std::string manifest_to_json(const RunManifest& mf) {
  json j;
  j["command"] = mf.command;
  j["input_digest"] = mf.input_digest;
  j["flags"] = mf.flags;
  j["seed"] = mf.seed;
  j["version"] = mf.version;
  j["timestamp"] = mf.timestamp;
  return j.dump();
}

std::string ranking_csv(const std::vector<RankedProfile>& rows, const RunManifest& mf) {
  std::ostringstream os;
  os << "# " << manifest_to_json(mf) << "\n";
  os << "profile,sink_id,metric,performance\n";
  for (const auto& r : rows)
    os << csv_quote(r.label) << "," << r.sink_id << "," << format_double(r.metric) << ","
       << format_double(r.performance) << "\n";
  return os.str();
}

std::string occupancy_csv(const MetaGame& meta, const std::vector<int>& sink_of,
                          const Eigen::VectorXd& visits, const RunManifest& mf) {
  const double total = std::max(visits.sum(), 1.0);
  std::ostringstream os;
  os << "# " << manifest_to_json(mf) << "\n";
  os << "profile,sink_id,visits,frequency\n";
  for (long s = 0; s < meta.num_profiles(); ++s)
    os << csv_quote(meta.profile_label(s)) << "," << sink_of[s] << ","
       << static_cast<long>(visits[s]) << "," << format_double(visits[s] / total) << "\n";
  return os.str();
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << content;
  if (!out) throw std::runtime_error(path + ": write failed");
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path + ": cannot open");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace sinkrank
