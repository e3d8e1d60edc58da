#pragma once

// Hand-built games with fully derived response graphs, used across the test
// suites. Each comment states the structure the tests pin down.
#include "sinkrank/game_model.hpp"
#include "sinkrank/response_graph.hpp"

#include <string>

namespace fixtures {

using sinkrank::MetaGame;
using sinkrank::SBRGraph;
using sinkrank::StochasticGame;

inline Eigen::MatrixXd table(std::initializer_list<std::initializer_list<double>> rows) {
  Eigen::MatrixXd m(static_cast<long>(rows.size()), static_cast<long>(rows.begin()->size()));
  long r = 0;
  for (const auto& row : rows) {
    long c = 0;
    for (double v : row) m(r, c++) = v;
    ++r;
  }
  return m;
}

// 3x3 game whose strict best response graph has no pure equilibrium and a
// unique four-cycle sink {a1b2, a2b2, a2b3, a1b3}; every sink profile has
// joint performance 0.5 under uniform weights. eps in (0,1) skews the b1
// column so b1 is never a best response for agent 2 against a1 or a2.
inline MetaGame cyclic_nine(double eps = 0.1) {
  const double e = 1.0 - eps;
  return MetaGame::from_table({{"a1", "a2", "a3"}, {"b1", "b2", "b3"}},
                              table({{1, e}, {0, 1}, {1, 0},
                                     {0, e}, {1, 0}, {0, 1},
                                     {0, 0}, {e, 0}, {e, 1}}));
}

// Two singleton-sink game engineered so the stochastically stable sink is the
// second-best one: agent 2 is indifferent between b1 and b3 against a1, so the
// best sink a1b1 can be left with a single history exploration while leaving
// a3b3 costs two.
inline MetaGame leaky() {
  return MetaGame::from_table({{"a1", "a2", "a3"}, {"b1", "b2", "b3"}},
                              table({{0.2, 0.2}, {0.0, 0.0}, {0.0, 0.2},
                                     {0.0, 0.0}, {0.0, 0.01}, {0.0, 0.0},
                                     {0.0, 0.0}, {0.05, 0.0}, {0.198, 0.198}}));
}

// Pure coordination with two strict equilibria of performance 1 and 0.05.
inline MetaGame coordination() {
  return MetaGame::from_table({{"a1", "a2"}, {"b1", "b2"}},
                              table({{1, 1}, {0, 0}, {0, 0}, {0.05, 0.05}}));
}

// Same shape scaled down: performances 0.3 and 0.05, used for the
// approximate-guarantee checks.
inline MetaGame coordination_scaled() {
  return MetaGame::from_table({{"a1", "a2"}, {"b1", "b2"}},
                              table({{0.3, 0.3}, {0, 0}, {0, 0}, {0.05, 0.05}}));
}

// Matching pennies; the whole profile set is one four-cycle sink and the
// uniform distribution is the unique coarse correlated equilibrium.
inline MetaGame pennies() {
  return MetaGame::from_table({{"H", "T"}, {"h", "t"}},
                              table({{1, 0}, {0, 1}, {0, 1}, {1, 0}}));
}

// Pennies scaled by 0.1 so exploration exponents stay small in chain tests.
inline MetaGame pennies_scaled() {
  return MetaGame::from_table({{"H", "T"}, {"h", "t"}},
                              table({{0.1, 0}, {0, 0.1}, {0, 0.1}, {0.1, 0}}));
}

// 3x3 game whose unique sink is the 2x2 pennies block {a1,a2}x{b1,b2}; the
// uniform distribution on the block is a coarse correlated equilibrium of the
// full game (third strategies yield 0.2 < 1/2 against the block marginals).
inline MetaGame pennies_block() {
  return MetaGame::from_table({{"a1", "a2", "a3"}, {"b1", "b2", "b3"}},
                              table({{1, 0}, {0, 1}, {0.5, 0.2},
                                     {0, 1}, {1, 0}, {0.5, 0.2},
                                     {0.2, 0.5}, {0.2, 0.5}, {0.2, 0.2}}));
}

// Mixed equilibrium on the corner block {a1,a2}x{b1,b2} is a coarse
// correlated equilibrium, yet strict best responses drain everything into the
// strict equilibrium a3b2 outside that support.
inline MetaGame corner() {
  return MetaGame::from_table({{"a1", "a2", "a3"}, {"b1", "b2", "b3"}},
                              table({{1, 0}, {0, 1}, {0, -2},
                                     {0, 1}, {1, 0}, {0, 0},
                                     {-2, 0}, {2, 1}, {0, 0}}));
}

// Four-cycle sink with uneven node performances 0.5, 0.6, 0.35, 0.5; the
// cycle metric is their mean 0.4875 while short-memory window minima sit
// below it.
inline MetaGame skewed_pennies() {
  return MetaGame::from_table({{"A", "B"}, {"C", "D"}},
                              table({{1, 0}, {0.2, 1}, {0, 0.7}, {0.9, 0.1}}));
}

// Six-node response graph given directly by its edge list; the single sink is
// the pure equilibrium node 0.
inline SBRGraph six_node_graph() {
  return sinkrank::graph_from_edges(
      {"(a1,b1)", "(a1,b2)", "(a1,b3)", "(a2,b1)", "(a2,b2)", "(a2,b3)"},
      {{1, 4}, {4, 5}, {5, 2}, {2, 0}, {3, 0}});
}

inline Eigen::VectorXd six_node_weights() {
  Eigen::VectorXd w(6);
  w << 1.0, 0.2, 0.4, 0.3, 0.5, 0.6;
  return w;
}

// Two-state two-agent discounted stochastic game with 16 policy profiles.
inline StochasticGame demo_game() {
  StochasticGame g;
  g.num_agents = 2;
  g.num_states = 2;
  g.num_actions = {2, 2};
  g.state_names = {"x0", "x1"};
  g.action_names = {{"u", "d"}, {"l", "r"}};
  g.transition = table({{0.8, 0.2}, {0.5, 0.5}, {0.5, 0.5}, {0.2, 0.8},
                        {0.6, 0.4}, {0.3, 0.7}, {0.3, 0.7}, {0.1, 0.9}});
  g.rewards = table({{1.0, 0.5}, {0.0, 1.0}, {0.6, 0.0}, {0.3, 0.3},
                     {0.2, 0.2}, {0.0, 0.4}, {0.5, 0.0}, {0.1, 0.6}});
  g.discounts = Eigen::Vector2d(0.9, 0.8);
  return g;
}

// Single absorbing state per state: closed-form values R/(1-beta).
inline StochasticGame absorbing_game() {
  StochasticGame g = demo_game();
  g.transition = table({{1, 0}, {1, 0}, {1, 0}, {1, 0},
                        {0, 1}, {0, 1}, {0, 1}, {0, 1}});
  return g;
}

inline std::string data_path(const std::string& name) {
  return std::string(SINKRANK_DATA_DIR) + "/" + name;
}

}  // namespace fixtures
