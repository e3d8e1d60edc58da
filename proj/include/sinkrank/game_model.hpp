#pragma once

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sinkrank {

// Tolerances and caps used across the library. Values are contractual:
// tests pin against exactly these.
constexpr double kRowSumTol = 1e-12;          // transition stochasticity
constexpr double kValueResidualTol = 1e-10;   // linear-solve residual
constexpr double kStrictTol = 1e-9;           // strict-improvement threshold (exact tables)
constexpr double kTieTol = 1e-9;              // best-response tie tolerance (exact tables)
constexpr double kMcTruncationTol = 1e-6;     // Monte Carlo horizon truncation
constexpr int kProfileCap = 4096;             // meta-game enumeration guard

// Discounted n-agent stochastic game with finite states and actions.
// Joint actions are indexed in mixed radix, agent 0 most significant.
struct StochasticGame {
  int num_agents = 0;
  int num_states = 0;
  std::vector<int> num_actions;                 // per agent
  std::vector<std::string> state_names;
  std::vector<std::vector<std::string>> action_names;
  Eigen::MatrixXd transition;                   // (|X|*|A|) x |X|, rows sum to 1
  Eigen::MatrixXd rewards;                      // (|X|*|A|) x n
  Eigen::VectorXd discounts;                    // per agent, in (0,1)

  int num_joint_actions() const;
  int joint_action_index(const std::vector<int>& a) const;
  int row_index(int state, int joint_action) const { return state * num_joint_actions() + joint_action; }
  void validate() const;                        // throws std::runtime_error
};

// Stationary deterministic policy profile: action_for[agent][state].
struct JointPolicy {
  std::vector<std::vector<int>> action_for;
};

// Exact policy evaluation for one agent: V = (I - beta_i P_pi)^{-1} R_pi^i.
// Throws if the linear-solve residual exceeds kValueResidualTol.
Eigen::VectorXd policy_value(const StochasticGame& game, const JointPolicy& policy, int agent);

// All stationary deterministic policies of one agent (|A^i|^{|X|} maps X -> A^i).
std::vector<std::vector<int>> enumerate_policies(const StochasticGame& game, int agent);

// Monte Carlo payoff estimate for a fixed policy profile. Initial states cycle
// over X; the horizon is chosen so the discounted tail is below kMcTruncationTol.
struct PayoffEstimate {
  Eigen::VectorXd mean;       // per agent
  Eigen::VectorXd std_err;    // per agent, standard error of the mean
  long episodes = 0;
  int horizon = 0;
};
PayoffEstimate estimate_payoff_empirical(const StochasticGame& game, const JointPolicy& policy,
                                         long episodes, std::uint64_t seed);

// Finite meta-game over joint strategy profiles. Payoffs are a dense
// (num_profiles x n) table; empirical tables carry standard errors.
struct MetaGame {
  int num_agents = 0;
  std::vector<std::vector<std::string>> strategy_names;  // per agent
  Eigen::MatrixXd payoffs;                               // num_profiles x n
  Eigen::MatrixXd payoff_stderr;                         // same shape, or 0x0 when exact
  // Strategy profiles backed by a stochastic game keep the generating policies.
  std::vector<std::vector<std::vector<int>>> policies;   // [agent][strategy] -> map X->A, empty otherwise

  int strategy_count(int agent) const { return static_cast<int>(strategy_names[agent].size()); }
  long num_profiles() const;
  long encode(const std::vector<int>& profile) const;
  std::vector<int> decode(long index) const;
  Eigen::VectorXd payoff(long profile) const;            // throws std::out_of_range
  bool empirical() const { return payoff_stderr.size() > 0; }
  double max_payoff() const { return payoffs.maxCoeff(); }
  double min_payoff() const { return payoffs.minCoeff(); }
  std::string profile_label(long index) const;           // concatenated strategy names
  void validate() const;

  static MetaGame from_table(std::vector<std::vector<std::string>> strategy_names,
                             const Eigen::MatrixXd& payoffs);
  // Exact meta-game by enumerating all policy profiles (guarded by kProfileCap).
  static MetaGame from_game(const StochasticGame& game, int profile_cap = kProfileCap);
  // Empirical meta-game: every profile estimated by Monte Carlo.
  static MetaGame from_game_empirical(const StochasticGame& game, long episodes, std::uint64_t seed,
                                      int profile_cap = kProfileCap);
};

// Best responses of `agent` against the opponents in `profile` (the agent's own
// coordinate is ignored): all strategies within tie_tol of the maximum payoff.
std::vector<int> best_responses(const MetaGame& meta, int agent, const std::vector<int>& profile,
                                double tie_tol = kTieTol);

}  // namespace sinkrank
