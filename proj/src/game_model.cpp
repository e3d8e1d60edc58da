#include "sinkrank/game_model.hpp"

#include "sinkrank/rng.hpp"

#include <Eigen/LU>
#include <cmath>
#include <numeric>

namespace sinkrank {

int StochasticGame::num_joint_actions() const {
  int k = 1;
  for (int a : num_actions) k *= a;
  return k;
}

int StochasticGame::joint_action_index(const std::vector<int>& a) const {
  int idx = 0;
  for (int i = 0; i < num_agents; ++i) idx = idx * num_actions[i] + a[i];
  return idx;
}

void StochasticGame::validate() const {
  if (num_agents < 1) throw std::runtime_error("game: need at least one agent");
  if (num_states < 1) throw std::runtime_error("game: need at least one state");
  if (static_cast<int>(num_actions.size()) != num_agents)
    throw std::runtime_error("game: num_actions size mismatch");
  for (int a : num_actions)
    if (a < 1) throw std::runtime_error("game: empty action set");
  const int rows = num_states * num_joint_actions();
  if (transition.rows() != rows || transition.cols() != num_states)
    throw std::runtime_error("game: transition shape mismatch");
  if (rewards.rows() != rows || rewards.cols() != num_agents)
    throw std::runtime_error("game: rewards shape mismatch");
  if (discounts.size() != num_agents) throw std::runtime_error("game: discounts size mismatch");
  for (int i = 0; i < num_agents; ++i)
    if (!(discounts[i] > 0.0 && discounts[i] < 1.0))
      throw std::runtime_error("game: discounts must lie in (0,1)");
  for (int r = 0; r < rows; ++r) {
    if (transition.row(r).minCoeff() < 0.0)
      throw std::runtime_error("game: negative transition probability");
    if (std::abs(transition.row(r).sum() - 1.0) > kRowSumTol)
      throw std::runtime_error("game: transition row does not sum to one");
  }
}

Eigen::VectorXd policy_value(const StochasticGame& game, const JointPolicy& policy, int agent) {
  const int nx = game.num_states;
  std::vector<int> act(game.num_agents);
  Eigen::MatrixXd P(nx, nx);
  Eigen::VectorXd R(nx);
  for (int x = 0; x < nx; ++x) {
    for (int i = 0; i < game.num_agents; ++i) act[i] = policy.action_for[i][x];
    const int row = game.row_index(x, game.joint_action_index(act));
    P.row(x) = game.transition.row(row);
    R[x] = game.rewards(row, agent);
  }
  const double beta = game.discounts[agent];
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(nx, nx) - beta * P;
  Eigen::VectorXd V = A.partialPivLu().solve(R);
  const double residual = (A * V - R).cwiseAbs().maxCoeff();
  if (residual > kValueResidualTol)
    throw std::runtime_error("policy_value: linear solve residual " + std::to_string(residual));
  return V;
}

std::vector<std::vector<int>> enumerate_policies(const StochasticGame& game, int agent) {
  const int na = game.num_actions[agent];
  const int nx = game.num_states;
  double count = std::pow(static_cast<double>(na), nx);
  if (count > 1e7) throw std::runtime_error("enumerate_policies: policy space too large");
  std::vector<std::vector<int>> out;
  out.reserve(static_cast<size_t>(count));
  std::vector<int> cur(nx, 0);
  while (true) {
    out.push_back(cur);
    int k = nx - 1;
    while (k >= 0 && ++cur[k] == na) cur[k--] = 0;
    if (k < 0) break;
  }
  return out;
}

PayoffEstimate estimate_payoff_empirical(const StochasticGame& game, const JointPolicy& policy,
                                         long episodes, std::uint64_t seed) {
  if (episodes < 2) throw std::runtime_error("estimate_payoff_empirical: need at least 2 episodes");
  const int n = game.num_agents;
  const int nx = game.num_states;
  // Horizon: discounted tail bounded by kMcTruncationTol for every agent.
  const double rmax = std::max(1e-12, game.rewards.cwiseAbs().maxCoeff());
  int horizon = 1;
  for (int i = 0; i < n; ++i) {
    const double beta = game.discounts[i];
    const double t = std::log(kMcTruncationTol * (1.0 - beta) / rmax) / std::log(beta);
    horizon = std::max(horizon, static_cast<int>(std::ceil(t)));
  }
  std::vector<int> act(n);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sumsq = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd ret(n);
  for (long e = 0; e < episodes; ++e) {
    auto rng = substream(seed, static_cast<std::uint64_t>(e), 0x45504953ULL);
    int x = static_cast<int>(e % nx);
    ret.setZero();
    Eigen::VectorXd disc = Eigen::VectorXd::Ones(n);
    for (int t = 0; t < horizon; ++t) {
      for (int i = 0; i < n; ++i) act[i] = policy.action_for[i][x];
      const int row = game.row_index(x, game.joint_action_index(act));
      ret += disc.cwiseProduct(game.rewards.row(row).transpose());
      disc = disc.cwiseProduct(game.discounts);
      x = sample_row(rng, game.transition.row(row), nx);
    }
    sum += ret;
    sumsq += ret.cwiseProduct(ret);
  }
  PayoffEstimate est;
  est.episodes = episodes;
  est.horizon = horizon;
  est.mean = sum / static_cast<double>(episodes);
  Eigen::VectorXd var =
      (sumsq - static_cast<double>(episodes) * est.mean.cwiseProduct(est.mean)) /
      static_cast<double>(episodes - 1);
  est.std_err = var.cwiseMax(0.0).cwiseSqrt() / std::sqrt(static_cast<double>(episodes));
  return est;
}

long MetaGame::num_profiles() const {
  long k = 1;
  for (int i = 0; i < num_agents; ++i) k *= strategy_count(i);
  return k;
}

long MetaGame::encode(const std::vector<int>& profile) const {
  long idx = 0;
  for (int i = 0; i < num_agents; ++i) {
    if (profile[i] < 0 || profile[i] >= strategy_count(i))
      throw std::out_of_range("meta: strategy index out of range");
    idx = idx * strategy_count(i) + profile[i];
  }
  return idx;
}

std::vector<int> MetaGame::decode(long index) const {
  if (index < 0 || index >= num_profiles()) throw std::out_of_range("meta: profile index out of range");
  std::vector<int> profile(num_agents);
  for (int i = num_agents - 1; i >= 0; --i) {
    profile[i] = static_cast<int>(index % strategy_count(i));
    index /= strategy_count(i);
  }
  return profile;
}

Eigen::VectorXd MetaGame::payoff(long profile) const {
  if (profile < 0 || profile >= num_profiles())
    throw std::out_of_range("meta: profile index out of range");
  return payoffs.row(profile).transpose();
}

std::string MetaGame::profile_label(long index) const {
  auto p = decode(index);
  std::string label;
  for (int i = 0; i < num_agents; ++i) label += strategy_names[i][p[i]];
  return label;
}

void MetaGame::validate() const {
  if (num_agents < 1) throw std::runtime_error("meta: need at least one agent");
  if (static_cast<int>(strategy_names.size()) != num_agents)
    throw std::runtime_error("meta: strategy_names size mismatch");
  for (const auto& names : strategy_names)
    if (names.empty()) throw std::runtime_error("meta: empty strategy set");
  if (payoffs.rows() != num_profiles() || payoffs.cols() != num_agents)
    throw std::runtime_error("meta: payoff shape mismatch");
  if (empirical() && (payoff_stderr.rows() != payoffs.rows() || payoff_stderr.cols() != payoffs.cols()))
    throw std::runtime_error("meta: stderr shape mismatch");
}

MetaGame MetaGame::from_table(std::vector<std::vector<std::string>> names,
                              const Eigen::MatrixXd& payoffs) {
  MetaGame meta;
  meta.num_agents = static_cast<int>(names.size());
  meta.strategy_names = std::move(names);
  meta.payoffs = payoffs;
  meta.validate();
  return meta;
}

namespace {

std::string policy_name(const std::vector<int>& policy) {
  std::string name = "p";
  for (int a : policy) name += std::to_string(a);
  return name;
}

MetaGame meta_skeleton(const StochasticGame& game, int profile_cap) {
  game.validate();
  MetaGame meta;
  meta.num_agents = game.num_agents;
  meta.strategy_names.resize(game.num_agents);
  meta.policies.resize(game.num_agents);
  long profiles = 1;
  for (int i = 0; i < game.num_agents; ++i) {
    meta.policies[i] = enumerate_policies(game, i);
    profiles *= static_cast<long>(meta.policies[i].size());
    if (profiles > profile_cap)
      throw std::runtime_error("meta: policy profile count exceeds cap of " +
                               std::to_string(profile_cap));
    for (const auto& p : meta.policies[i]) meta.strategy_names[i].push_back(policy_name(p));
  }
  return meta;
}

JointPolicy assemble(const MetaGame& meta, const std::vector<int>& profile) {
  JointPolicy jp;
  for (int i = 0; i < meta.num_agents; ++i) jp.action_for.push_back(meta.policies[i][profile[i]]);
  return jp;
}

}  // namespace

MetaGame MetaGame::from_game(const StochasticGame& game, int profile_cap) {
  MetaGame meta = meta_skeleton(game, profile_cap);
  const long np = meta.num_profiles();
  meta.payoffs.resize(np, game.num_agents);
  for (long s = 0; s < np; ++s) {
    JointPolicy jp = assemble(meta, meta.decode(s));
    for (int i = 0; i < game.num_agents; ++i)
      meta.payoffs(s, i) = policy_value(game, jp, i).mean();
  }
  meta.validate();
  return meta;
}

MetaGame MetaGame::from_game_empirical(const StochasticGame& game, long episodes,
                                       std::uint64_t seed, int profile_cap) {
  MetaGame meta = meta_skeleton(game, profile_cap);
  const long np = meta.num_profiles();
  meta.payoffs.resize(np, game.num_agents);
  meta.payoff_stderr.resize(np, game.num_agents);
  for (long s = 0; s < np; ++s) {
    JointPolicy jp = assemble(meta, meta.decode(s));
    PayoffEstimate est = estimate_payoff_empirical(game, jp, episodes,
                                                   mix64(seed ^ static_cast<std::uint64_t>(s)));
    meta.payoffs.row(s) = est.mean.transpose();
    meta.payoff_stderr.row(s) = est.std_err.transpose();
  }
  meta.validate();
  return meta;
}

std::vector<int> best_responses(const MetaGame& meta, int agent, const std::vector<int>& profile,
                                double tie_tol) {
  std::vector<int> probe = profile;
  const int k = meta.strategy_count(agent);
  Eigen::VectorXd val(k);
  for (int a = 0; a < k; ++a) {
    probe[agent] = a;
    val[a] = meta.payoffs(meta.encode(probe), agent);
  }
  const double best = val.maxCoeff();
  std::vector<int> out;
  for (int a = 0; a < k; ++a)
    if (val[a] >= best - tie_tol) out.push_back(a);
  return out;
}

}  // namespace sinkrank
