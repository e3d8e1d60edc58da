#pragma once

#include "sinkrank/game_model.hpp"

#include <boost/multiprecision/cpp_int.hpp>

namespace sinkrank {

using Rational = boost::multiprecision::cpp_rational;

constexpr double kCceDefaultTol = 1e-9;

// Coarse correlated equilibrium check for a distribution q over profiles:
// no agent gains more than tol by committing to any fixed strategy before the
// draw. Reports the worst constraint.
struct CceCheck {
  bool ok = false;
  double worst_violation = 0.0;   // max over constraints of (deviation - current)
  int worst_agent = -1;
  int worst_deviation = -1;
};
CceCheck is_cce(const MetaGame& meta, const Eigen::VectorXd& q, double tol = kCceDefaultTol);

// Exact feasibility of a CCE supported (with mass >= mu each) exactly on
// `support`: rational simplex on the dyadic rationals of the payoff table.
struct SupportFeasibility {
  bool feasible = false;
  Eigen::VectorXd witness;        // full-length distribution, zeros off support
  double mu = 0.0;
  long lp_variables = 0;
};
SupportFeasibility cce_with_support_exists(const MetaGame& meta, const std::vector<long>& support,
                                           const Rational& mu = Rational(1, 1000000));

// Exact rational LP feasibility: x >= 0, eq * [x;1] = 0, ge * [x;1] >= 0
// (each row's last column is the constant term). Phase-I simplex with Bland's
// rule; guarded to kLpVarCap variables.
constexpr long kLpVarCap = 200;
struct LpResult {
  bool feasible = false;
  std::vector<Rational> x;
};
LpResult exact_lp_feasible(const std::vector<std::vector<Rational>>& eq,
                           const std::vector<std::vector<Rational>>& ge, long num_vars);

// Exact dyadic rational from a double (every finite double is p * 2^k).
Rational to_rational(double v);

}  // namespace sinkrank
