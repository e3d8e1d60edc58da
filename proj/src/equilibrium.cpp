#include "sinkrank/equilibrium.hpp"

#include <cmath>
#include <limits>

namespace sinkrank {

Rational to_rational(double v) {
  if (!std::isfinite(v)) throw std::runtime_error("to_rational: non-finite value");
  if (v == 0.0) return Rational(0);
  int e = 0;
  const double m = std::frexp(v, &e);
  const auto im = static_cast<long long>(std::ldexp(m, 53));   // exact: |m| in [0.5, 1)
  const int shift = e - 53;
  boost::multiprecision::cpp_int num = im;
  if (shift >= 0) return Rational(num << shift);
  return Rational(num, boost::multiprecision::cpp_int(1) << -shift);
}

CceCheck is_cce(const MetaGame& meta, const Eigen::VectorXd& q, double tol) {
  meta.validate();
  const long np = meta.num_profiles();
  if (q.size() != np) throw std::runtime_error("is_cce: distribution size mismatch");
  if (q.minCoeff() < -1e-12) throw std::runtime_error("is_cce: negative probability");
  if (std::abs(q.sum() - 1.0) > 1e-9) throw std::runtime_error("is_cce: probabilities must sum to one");
  CceCheck check;
  check.worst_violation = -std::numeric_limits<double>::infinity();
  const Eigen::VectorXd current = meta.payoffs.transpose() * q;
  for (int i = 0; i < meta.num_agents; ++i) {
    for (int t = 0; t < meta.strategy_count(i); ++t) {
      double dev = 0.0;
      for (long s = 0; s < np; ++s) {
        if (q[s] == 0.0) continue;
        auto p = meta.decode(s);
        p[i] = t;
        dev += q[s] * meta.payoffs(meta.encode(p), i);
      }
      const double violation = dev - current[i];
      if (violation > check.worst_violation) {
        check.worst_violation = violation;
        check.worst_agent = i;
        check.worst_deviation = t;
      }
    }
  }
  check.ok = check.worst_violation <= tol;
  return check;
}

namespace {

// Phase-I simplex with Bland's rule on A z = b, z >= 0 (b made nonnegative by
// row negation, artificial basis). Feasible iff the artificial sum reaches 0.
struct Tableau {
  std::vector<std::vector<Rational>> rows;   // R x (cols + 1), RHS last
  std::vector<long> basis;
  long cols = 0;

  void pivot(long r, long c) {
    auto& prow = rows[r];
    const Rational p = prow[c];
    for (auto& x : prow) x /= p;
    for (size_t i = 0; i < rows.size(); ++i) {
      if (static_cast<long>(i) == r) continue;
      const Rational factor = rows[i][c];
      if (factor == 0) continue;
      for (long j = 0; j <= cols; ++j) rows[i][j] -= factor * prow[j];
    }
    basis[r] = c;
  }
};

}  // namespace

LpResult exact_lp_feasible(const std::vector<std::vector<Rational>>& eq,
                           const std::vector<std::vector<Rational>>& ge, long num_vars) {
  if (num_vars > kLpVarCap) throw std::runtime_error("exact_lp_feasible: variable cap exceeded");
  const long num_ge = static_cast<long>(ge.size());
  const long num_rows = static_cast<long>(eq.size()) + num_ge;
  const long slack0 = num_vars;
  const long art0 = num_vars + num_ge;
  const long total = art0 + num_rows;

  Tableau t;
  t.cols = total;
  t.basis.resize(num_rows);
  t.rows.assign(num_rows, std::vector<Rational>(total + 1, Rational(0)));
  long r = 0;
  auto fill = [&](const std::vector<Rational>& row, long slack) {
    if (static_cast<long>(row.size()) != num_vars + 1)
      throw std::runtime_error("exact_lp_feasible: row width mismatch");
    for (long j = 0; j < num_vars; ++j) t.rows[r][j] = row[j];
    if (slack >= 0) t.rows[r][slack] = Rational(-1);
    t.rows[r][total] = -row[num_vars];               // move constant to RHS
    if (t.rows[r][total] < 0)
      for (long j = 0; j <= total; ++j) t.rows[r][j] = -t.rows[r][j];
    t.rows[r][art0 + r] = Rational(1);
    t.basis[r] = art0 + r;
    ++r;
  };
  for (const auto& row : eq) fill(row, -1);
  for (long g = 0; g < num_ge; ++g) fill(ge[g], slack0 + g);

  // Reduced costs for minimizing the artificial sum, with artificial basis.
  std::vector<Rational> red(total + 1, Rational(0));
  for (long j = 0; j <= total; ++j) {
    Rational s(0);
    for (long i = 0; i < num_rows; ++i) s += t.rows[i][j];
    red[j] = s;
  }
  for (long j = art0; j < total; ++j) red[j] = Rational(0);

  while (true) {
    long enter = -1;
    for (long j = 0; j < total; ++j) {
      if (red[j] > 0) { enter = j; break; }                    // Bland: lowest index
    }
    if (enter < 0) break;
    long leave = -1;
    Rational best_ratio(0);
    for (long i = 0; i < num_rows; ++i) {
      if (t.rows[i][enter] <= 0) continue;
      const Rational ratio = t.rows[i][total] / t.rows[i][enter];
      if (leave < 0 || ratio < best_ratio ||
          (ratio == best_ratio && t.basis[i] < t.basis[leave])) {
        leave = i;
        best_ratio = ratio;
      }
    }
    if (leave < 0) throw std::logic_error("exact_lp_feasible: unbounded phase-one objective");
    const Rational factor = red[enter];
    t.pivot(leave, enter);
    for (long j = 0; j <= total; ++j) red[j] -= factor * t.rows[leave][j];
  }

  LpResult res;
  res.feasible = red[total] == 0;
  if (res.feasible) {
    res.x.assign(num_vars, Rational(0));
    for (long i = 0; i < num_rows; ++i)
      if (t.basis[i] < num_vars) res.x[t.basis[i]] = t.rows[i][total];
  }
  return res;
}

SupportFeasibility cce_with_support_exists(const MetaGame& meta, const std::vector<long>& support,
                                           const Rational& mu) {
  meta.validate();
  if (support.empty()) throw std::runtime_error("cce_with_support_exists: empty support");
  const long K = static_cast<long>(support.size());
  for (long s : support)
    if (s < 0 || s >= meta.num_profiles())
      throw std::out_of_range("cce_with_support_exists: profile out of range");

  // Variables u_s = q_s - mu >= 0 over the support.
  SupportFeasibility out;
  out.mu = static_cast<double>(mu);
  out.lp_variables = K;
  const Rational slack_mass = Rational(1) - Rational(K) * mu;
  if (slack_mass < 0) return out;                    // support too large for mu

  std::vector<std::vector<Rational>> eq, ge;
  std::vector<Rational> mass(K + 1, Rational(1));
  mass[K] = -slack_mass;                             // sum u = 1 - K*mu
  eq.push_back(std::move(mass));
  for (int i = 0; i < meta.num_agents; ++i) {
    for (int tdev = 0; tdev < meta.strategy_count(i); ++tdev) {
      std::vector<Rational> row(K + 1, Rational(0));
      Rational const_term(0);
      for (long k = 0; k < K; ++k) {
        auto p = meta.decode(support[k]);
        const Rational cur = to_rational(meta.payoffs(support[k], i));
        p[i] = tdev;
        const Rational dev = to_rational(meta.payoffs(meta.encode(p), i));
        row[k] = cur - dev;
        const_term += mu * (cur - dev);
      }
      row[K] = const_term;
      ge.push_back(std::move(row));
    }
  }
  LpResult lp = exact_lp_feasible(eq, ge, K);
  out.feasible = lp.feasible;
  if (lp.feasible) {
    out.witness = Eigen::VectorXd::Zero(meta.num_profiles());
    for (long k = 0; k < K; ++k)
      out.witness[support[k]] = static_cast<double>(Rational(mu + lp.x[k]));
  }
  return out;
}

}  // namespace sinkrank
