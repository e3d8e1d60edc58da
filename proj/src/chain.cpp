#include "sinkrank/chain.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <map>

namespace sinkrank {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

struct ProfileInfo {
  std::vector<char> pne;
  std::vector<std::vector<std::vector<int>>> br;   // [agent][profile]
};

ProfileInfo profile_info(const MetaGame& meta, double tie_tol) {
  const long np = meta.num_profiles();
  ProfileInfo info;
  info.pne.assign(np, 1);
  info.br.assign(meta.num_agents, std::vector<std::vector<int>>(np));
  for (long s = 0; s < np; ++s) {
    const auto profile = meta.decode(s);
    for (int i = 0; i < meta.num_agents; ++i) {
      info.br[i][s] = best_responses(meta, i, profile, tie_tol);
      auto probe = profile;
      for (int a = 0; a < meta.strategy_count(i); ++a) {
        if (a == profile[i]) continue;
        probe[i] = a;
        if (meta.payoffs(meta.encode(probe), i) - meta.payoffs(s, i) > kStrictTol) info.pne[s] = 0;
      }
      probe[i] = profile[i];
    }
  }
  return info;
}

long checked_window_count(long num_profiles, int m, long cap) {
  double x = 1.0;
  long count = 1;
  for (int k = 0; k < m; ++k) {
    x *= static_cast<double>(num_profiles);
    if (x > static_cast<double>(cap))
      throw std::runtime_error("history chain: |S|^m exceeds state cap of " + std::to_string(cap));
    count *= num_profiles;
  }
  return count;
}

}  // namespace

long state_cap_from_env() {
  if (const char* env = std::getenv("SINKRANK_STATE_CAP")) {
    const long cap = std::atol(env);
    if (cap > 0) return cap;
  }
  return kDefaultStateCap;
}

long HistoryChain::append(long h, long profile) const {
  const long stride = num_windows / num_profiles;
  return (h % stride) * num_profiles + profile;
}

std::vector<long> HistoryChain::window_of(long h) const {
  std::vector<long> window(m);
  for (int k = m - 1; k >= 0; --k) {
    window[k] = h % num_profiles;
    h /= num_profiles;
  }
  return window;
}

long HistoryChain::index_of(const std::vector<long>& window) const {
  long h = 0;
  for (long s : window) h = h * num_profiles + s;
  return h;
}

HistoryChain enumerate_history_chain(const MetaGame& meta, int m, double epsilon,
                                     const FeasibleFunction& f, double tie_tol, long state_cap) {
  meta.validate();
  f.validate();
  if (m < 1) throw std::runtime_error("history chain: m must be >= 1");
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw std::runtime_error("history chain: epsilon must lie in (0,1)");
  if (state_cap < 0) state_cap = state_cap_from_env();
  const long np = meta.num_profiles();
  const int n = meta.num_agents;

  HistoryChain chain;
  chain.m = m;
  chain.epsilon = epsilon;
  chain.num_profiles = np;
  chain.num_windows = checked_window_count(np, m, state_cap);

  ProfileInfo info = profile_info(meta, tie_tol);
  Eigen::VectorXd wperf = meta.payoffs * f.weights;
  chain.kappa.resize(chain.num_windows);

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(chain.num_windows * (np + 1));
  std::vector<double> dist;                        // per-joint-profile probability
  std::map<long, double> row;
  std::vector<int> digits;
  for (long h = 0; h < chain.num_windows; ++h) {
    // Mean weighted recorded payoff drives the exploration exponent.
    double mean = 0.0;
    long rest = h;
    for (int k = 0; k < m; ++k) {
      mean += wperf[rest % np];
      rest /= np;
    }
    mean /= static_cast<double>(m);
    const double kappa = f.eval_mean(mean);
    chain.kappa[h] = kappa;
    const double eb = std::pow(epsilon, kappa);
    const long s = h % np;
    const auto sprof = meta.decode(s);

    row.clear();
    for (int j = 0; j < n; ++j) {
      const double pj = 1.0 / static_cast<double>(n);
      // Joint distribution of s_{tau+1} given selected agent j.
      dist.assign(np, 0.0);
      for (long t = 0; t < np; ++t) {
        const auto tprof = meta.decode(t);
        double p = 1.0;
        for (int i = 0; i < n; ++i) {
          const int k = meta.strategy_count(i);
          double pi = eb / static_cast<double>(k);
          if (i == j) {
            const auto& brs = info.br[i][s];
            if (std::find(brs.begin(), brs.end(), tprof[i]) != brs.end())
              pi += (1.0 - eb) / static_cast<double>(brs.size());
          } else if (tprof[i] == sprof[i]) {
            pi += 1.0 - eb;
          }
          p *= pi;
          if (p == 0.0) break;
        }
        dist[t] = p;
      }
      if (info.pne[s]) {
        row[chain.append(h, s)] += pj * (1.0 - eb);
        for (long t = 0; t < np; ++t)
          if (dist[t] > 0.0) row[chain.append(h, t)] += pj * eb * dist[t];
      } else {
        for (long t = 0; t < np; ++t) {
          if (dist[t] == 0.0) continue;
          const bool improves = meta.payoffs(t, j) - meta.payoffs(s, j) > kStrictTol;
          if (improves)
            row[chain.append(h, t)] += pj * (1.0 - eb) * dist[t];
          else
            row[h] += pj * (1.0 - eb) * dist[t];
          row[chain.append(h, t)] += pj * eb * dist[t];
        }
      }
    }
    double sum = 0.0;
    for (const auto& [g, p] : row) {
      trip.emplace_back(static_cast<int>(h), static_cast<int>(g), p);
      sum += p;
    }
    if (std::abs(sum - 1.0) > kRowSumTol)
      throw std::logic_error("history chain: row mass " + std::to_string(sum));
  }
  chain.P.resize(chain.num_windows, chain.num_windows);
  chain.P.setFromTriplets(trip.begin(), trip.end());
  return chain;
}

Eigen::VectorXd stationary_distribution(const Eigen::SparseMatrix<double, Eigen::RowMajor>& P) {
  const long n = P.rows();
  if (n != P.cols() || n < 1) throw std::runtime_error("stationary: square matrix required");
  // (P^T - I) pi = 0 with the last balance equation replaced by sum(pi) = 1.
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(P.nonZeros() + 2 * n);
  for (long r = 0; r < n; ++r)
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(P, r); it; ++it)
      if (it.col() != n - 1) trip.emplace_back(static_cast<int>(it.col()), static_cast<int>(r), it.value());
  for (long i = 0; i < n - 1; ++i) trip.emplace_back(static_cast<int>(i), static_cast<int>(i), -1.0);
  for (long j = 0; j < n; ++j) trip.emplace_back(static_cast<int>(n - 1), static_cast<int>(j), 1.0);
  Eigen::SparseMatrix<double> M(n, n);
  M.setFromTriplets(trip.begin(), trip.end());
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b[n - 1] = 1.0;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(M);
  if (lu.info() != Eigen::Success)
    throw std::runtime_error("stationary: factorization failed (chain not irreducible?)");
  Eigen::VectorXd pi = lu.solve(b);
  if (lu.info() != Eigen::Success) throw std::runtime_error("stationary: solve failed");
  const double residual = (P.transpose() * pi - pi).cwiseAbs().maxCoeff();
  if (residual > kStationaryResidualTol)
    throw std::runtime_error("stationary: residual " + std::to_string(residual));
  pi = pi.cwiseMax(0.0);
  pi /= pi.sum();
  return pi;
}

int exploration_number(const MetaGame& meta, long from, long to, double tie_tol) {
  const int n = meta.num_agents;
  const auto s = meta.decode(from);
  const auto t = meta.decode(to);
  // PNE check and per-agent best responses against s^{-i}.
  bool pne = true;
  std::vector<bool> target_is_br(n);
  for (int i = 0; i < n && pne; ++i) {
    auto probe = s;
    for (int a = 0; a < meta.strategy_count(i); ++a) {
      if (a == s[i]) continue;
      probe[i] = a;
      if (meta.payoffs(meta.encode(probe), i) - meta.payoffs(from, i) > kStrictTol) {
        pne = false;
        break;
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    const auto brs = best_responses(meta, i, s, tie_tol);
    target_is_br[i] = std::find(brs.begin(), brs.end(), t[i]) != brs.end();
  }
  if (pne && from == to) return 0;                 // unperturbed self-repetition
  int best = n + 1;
  for (int j = 0; j < n; ++j) {
    int strategy_cost = 0;
    for (int i = 0; i < n; ++i) {
      if (i == j)
        strategy_cost += target_is_br[i] ? 0 : 1;
      else
        strategy_cost += t[i] == s[i] ? 0 : 1;
    }
    int history_cost = 1;                          // forced append
    if (!pne && meta.payoffs(to, j) - meta.payoffs(from, j) > kStrictTol) history_cost = 0;
    best = std::min(best, strategy_cost + history_cost);
  }
  return best;
}

double ResistanceGraph::resistance(long h, long g) const {
  if (h == g) return 0.0;
  for (const auto& [to, r] : out[h])
    if (to == g) return r;
  return kInf;
}

ResistanceGraph resistance_graph(const MetaGame& meta, int m, const FeasibleFunction& f,
                                 double tie_tol, long state_cap) {
  meta.validate();
  f.validate();
  if (state_cap < 0) state_cap = state_cap_from_env();
  const long np = meta.num_profiles();
  ResistanceGraph rg;
  rg.m = m;
  rg.num_windows = checked_window_count(np, m, state_cap);
  rg.out.resize(rg.num_windows);
  rg.kappa.resize(rg.num_windows);
  Eigen::VectorXd wperf = meta.payoffs * f.weights;
  // Exploration numbers depend only on the ordered profile pair.
  Eigen::MatrixXi expl(np, np);
  for (long s = 0; s < np; ++s)
    for (long t = 0; t < np; ++t) expl(s, t) = exploration_number(meta, s, t, tie_tol);
  const long stride = rg.num_windows / np;
  for (long h = 0; h < rg.num_windows; ++h) {
    double mean = 0.0;
    long rest = h;
    for (int k = 0; k < m; ++k) {
      mean += wperf[rest % np];
      rest /= np;
    }
    rg.kappa[h] = f.eval_mean(mean / static_cast<double>(m));
    const long s = h % np;
    for (long t = 0; t < np; ++t) {
      const long g = (h % stride) * np + t;
      if (g == h) continue;
      rg.out[h].emplace_back(g, static_cast<double>(expl(s, t)) * rg.kappa[h]);
    }
  }
  return rg;
}

namespace {

struct ArborEdge {
  int from, to;
  double w;
};

// Chu-Liu/Edmonds minimum spanning arborescence rooted at `root` (every other
// node one incoming edge, all reachable from the root).
double min_arborescence(int n, std::vector<ArborEdge> edges, int root) {
  double total = 0.0;
  while (true) {
    std::vector<double> in_w(n, kInf);
    std::vector<int> in_from(n, -1);
    for (const auto& e : edges) {
      if (e.to == root || e.from == e.to) continue;
      if (e.w < in_w[e.to]) {
        in_w[e.to] = e.w;
        in_from[e.to] = e.from;
      }
    }
    for (int v = 0; v < n; ++v)
      if (v != root && in_from[v] == -1) return kInf;
    for (int v = 0; v < n; ++v)
      if (v != root) total += in_w[v];
    // Cycle detection over the chosen in-edges.
    std::vector<int> id(n, -1), mark(n, -1);
    int comp = 0;
    for (int v = 0; v < n; ++v) {
      int u = v;
      while (u != root && mark[u] == -1 && id[u] == -1) {
        mark[u] = v;
        u = in_from[u];
      }
      if (u != root && id[u] == -1 && mark[u] == v) {
        int w = u;
        do {
          id[w] = comp;
          w = in_from[w];
        } while (w != u);
        ++comp;
      }
    }
    if (comp == 0) return total;
    for (int v = 0; v < n; ++v)
      if (id[v] == -1) id[v] = comp++;
    std::vector<ArborEdge> next;
    next.reserve(edges.size());
    for (const auto& e : edges) {
      const int u = id[e.from], v = id[e.to];
      if (u == v) continue;
      // Every node's committed minimum in-edge is already in `total`, so
      // surviving edges carry only their excess over that minimum.
      const double adj = std::isinf(in_w[e.to]) ? e.w : e.w - in_w[e.to];
      next.push_back({u, v, adj});
    }
    edges = std::move(next);
    root = id[root];
    n = comp;
  }
}

std::vector<ArborEdge> reversed_edges(const ResistanceGraph& rg) {
  std::vector<ArborEdge> edges;
  for (long h = 0; h < rg.num_windows; ++h)
    for (const auto& [g, r] : rg.out[h])
      edges.push_back({static_cast<int>(g), static_cast<int>(h), r});
  return edges;
}

}  // namespace

double stochastic_potential(const ResistanceGraph& rg, long root) {
  return min_arborescence(static_cast<int>(rg.num_windows), reversed_edges(rg),
                          static_cast<int>(root));
}

std::vector<std::vector<long>> rcc_of_sink(const SBRGraph& graph, const std::vector<int>& sink,
                                           int m, long cap) {
  std::vector<std::vector<long>> out;
  if (sink.size() == 1 && graph.pne[sink.front()]) {
    out.emplace_back(m, static_cast<long>(sink.front()));
    return out;
  }
  std::vector<char> member(graph.num_nodes, 0);
  for (int v : sink) member[v] = 1;
  std::vector<long> walk;
  // Depth-first enumeration of length-m walks inside the sink.
  std::function<void(int)> extend = [&](int v) {
    walk.push_back(v);
    if (static_cast<int>(walk.size()) == m) {
      if (static_cast<long>(out.size()) >= cap)
        throw std::runtime_error("rcc_of_sink: enumeration cap exceeded");
      out.push_back(walk);
    } else {
      for (int t : graph.out_edges[v])
        if (member[t]) extend(t);
    }
    walk.pop_back();
  };
  for (int v : sink) extend(v);
  std::sort(out.begin(), out.end());
  return out;
}

double rcc_min_performance(const SBRGraph& graph, const std::vector<int>& sink,
                           const Eigen::VectorXd& node_weights, int m) {
  return memory_metric(graph, sink, node_weights, m);
}

StabilityReport stochastically_stable(const MetaGame& meta, int m, const FeasibleFunction& f,
                                      const std::vector<double>& eps_grid, double tie_tol,
                                      long gamma_table_cap) {
  if (eps_grid.empty()) throw std::runtime_error("stochastically_stable: empty epsilon grid");
  StabilityReport report;
  report.m = m;
  report.delta = f.delta;
  report.eps_grid = eps_grid;
  std::sort(report.eps_grid.begin(), report.eps_grid.end(), std::greater<double>());

  SBRGraph graph = build_sbr_graph(meta, tie_tol);
  auto sinks = sink_equilibria(graph);
  ResistanceGraph rg = resistance_graph(meta, m, f, tie_tol);
  report.num_windows = rg.num_windows;

  HistoryChain shape;                       // only for index arithmetic
  shape.m = m;
  shape.num_profiles = meta.num_profiles();
  shape.num_windows = rg.num_windows;

  for (const auto& q : sinks) {
    report.rcc_windows.emplace_back();
    for (const auto& window : rcc_of_sink(graph, q.members, m))
      report.rcc_windows.back().push_back(shape.index_of(window));
  }
  report.gamma_bar.assign(sinks.size(), 0.0);
  std::vector<double> min_kappa(sinks.size(), kInf);
  for (size_t i = 0; i < sinks.size(); ++i)
    for (long h : report.rcc_windows[i]) min_kappa[i] = std::min(min_kappa[i], rg.kappa[h]);
  for (size_t i = 0; i < sinks.size(); ++i)
    for (size_t j = 0; j < sinks.size(); ++j)
      if (j != i) report.gamma_bar[i] += min_kappa[j];

  // Stochastic potential: full table when small, recurrent windows otherwise.
  const auto edges = reversed_edges(rg);
  report.full_gamma_table = rg.num_windows <= gamma_table_cap;
  report.gamma.assign(rg.num_windows, kInf);
  report.min_gamma = kInf;
  auto eval_gamma = [&](long h) {
    report.gamma[h] =
        min_arborescence(static_cast<int>(rg.num_windows), edges, static_cast<int>(h));
    report.min_gamma = std::min(report.min_gamma, report.gamma[h]);
  };
  if (report.full_gamma_table) {
    for (long h = 0; h < rg.num_windows; ++h) eval_gamma(h);
  } else {
    for (const auto& windows : report.rcc_windows)
      for (long h : windows) eval_gamma(h);
  }
  for (long h = 0; h < rg.num_windows; ++h)
    if (report.gamma[h] <= report.min_gamma + 1e-9) report.stable_windows.push_back(h);
  std::vector<char> prof_seen(meta.num_profiles(), 0);
  std::vector<char> sink_seen(sinks.size(), 0);
  auto sink_of = sink_membership(graph, sinks);
  for (long h : report.stable_windows) {
    for (long s : shape.window_of(h))
      if (!prof_seen[s]) {
        prof_seen[s] = 1;
        report.stable_profiles.push_back(s);
      }
    const int q = sink_of[h % meta.num_profiles()];
    if (q >= 0 && !sink_seen[q]) {
      sink_seen[q] = 1;
      report.stable_sinks.push_back(q);
    }
  }
  std::sort(report.stable_profiles.begin(), report.stable_profiles.end());
  std::sort(report.stable_sinks.begin(), report.stable_sinks.end());

  for (double eps : report.eps_grid) {
    HistoryChain chain = enumerate_history_chain(meta, m, eps, f, tie_tol);
    report.pi.push_back(stationary_distribution(chain.P));
  }
  report.pi_limit = report.pi.back();
  for (size_t k = 0; k + 1 < report.pi.size(); ++k)
    report.tv_successive.push_back(0.5 * (report.pi[k] - report.pi[k + 1]).cwiseAbs().sum());
  report.profile_mass_limit = Eigen::VectorXd::Zero(meta.num_profiles());
  for (long h = 0; h < rg.num_windows; ++h)
    report.profile_mass_limit[h % meta.num_profiles()] += report.pi_limit[h];
  return report;
}

VerifyReport verify_guarantees(const MetaGame& meta, const VerifyOptions& opt) {
  VerifyReport report;
  report.mode = opt.mode;
  meta.validate();
  const int n = meta.num_agents;
  Eigen::VectorXd weights = opt.weights.size() ? opt.weights : uniform_weights(n);
  validate_weights(weights, n);

  SBRGraph graph = build_sbr_graph(meta);
  auto sinks = sink_equilibria(graph);
  Eigen::VectorXd wperf = performance(meta, weights);
  const bool cycle_kind = opt.mode == VerifyMode::kCycleExact || opt.mode == VerifyMode::kCycleApprox;
  const bool exact_kind = opt.mode == VerifyMode::kCycleExact || opt.mode == VerifyMode::kMemoryExact;

  report.cycle_bound = 1;
  for (const auto& q : sinks) {
    report.sink_metric.push_back(cycle_kind ? cycle_metric(graph, q.members, wperf)
                                            : memory_metric(graph, q.members, wperf, opt.m));
    report.cycle_bound = std::max(report.cycle_bound, max_cycle_length_bound(graph, q.members));
  }
  report.best_sink = 0;
  for (size_t i = 1; i < sinks.size(); ++i)
    if (report.sink_metric[i] > report.sink_metric[report.best_sink])
      report.best_sink = static_cast<int>(i);

  auto fail = [&](const std::string& msg) { report.precondition_failures.push_back(msg); };
  if (meta.min_payoff() < 0.0) fail("payoffs must be nonnegative (payoff bound assumption)");
  report.j_max = meta.max_payoff();
  for (size_t i = 0; i < sinks.size(); ++i)
    if (static_cast<int>(i) != report.best_sink &&
        std::abs(report.sink_metric[i] - report.sink_metric[report.best_sink]) <= 1e-12)
      fail("max-metric sink is not unique");

  FeasibleFunction f;
  f.delta = opt.delta;
  f.num_sinks = static_cast<int>(sinks.size());
  f.num_agents = n;
  f.base = opt.base;
  f.weights = weights;
  try {
    f.validate();
  } catch (const std::exception& e) {
    fail(e.what());
  }

  const double second = [&] {
    double best2 = -kInf;
    for (size_t i = 0; i < sinks.size(); ++i)
      if (static_cast<int>(i) != report.best_sink) best2 = std::max(best2, report.sink_metric[i]);
    return best2;
  }();

  if (exact_kind) {
    if (!opt.delta0) {
      fail("metric gap delta0 required");
    } else {
      if (!(opt.delta > 0.0 && opt.delta < *opt.delta0)) fail("need 0 < delta < delta0");
      if (sinks.size() > 1 && report.sink_metric[report.best_sink] < second + *opt.delta0 - 1e-12)
        fail("metric gap delta0 not satisfied by the sink metrics");
      if (opt.mode == VerifyMode::kCycleExact) {
        report.required_m = 2.0 * report.cycle_bound * report.j_max / (*opt.delta0 - opt.delta);
        if (static_cast<double>(opt.m) < report.required_m - 1e-12)
          fail("memory length below 2*L*Jmax/(delta0-delta)");
      }
    }
  } else {
    if (!opt.delta_bar) {
      fail("tolerance delta_bar required");
    } else {
      if (!(opt.delta > 0.0 && opt.delta < *opt.delta_bar)) fail("need 0 < delta < delta_bar");
      if (opt.mode == VerifyMode::kCycleApprox) {
        report.required_m = 2.0 * report.cycle_bound * report.j_max / (*opt.delta_bar - opt.delta);
        if (static_cast<double>(opt.m) < report.required_m - 1e-12)
          fail("memory length below 2*L*Jmax/(delta_bar-delta)");
      }
    }
  }
  report.preconditions_ok = report.precondition_failures.empty();
  if (!report.preconditions_ok) return report;

  report.stability = stochastically_stable(meta, opt.m, f, opt.eps_grid);
  const auto& st = report.stability;

  if (exact_kind) {
    // Conclusion: the stable set is exactly the recurrent class of the
    // max-metric sink, cross-validated by the stationary mass.
    std::vector<long> target = st.rcc_windows[report.best_sink];
    std::sort(target.begin(), target.end());
    std::vector<long> stable = st.stable_windows;
    std::sort(stable.begin(), stable.end());
    bool same = stable == target;
    double mass = 0.0;
    for (long h : target) mass += st.pi_limit[h];
    bool monotone = true;
    double prev = -1.0;
    for (const auto& pi : st.pi) {
      double mk = 0.0;
      for (long h : target) mk += pi[h];
      if (mk < prev - 1e-12) monotone = false;
      prev = mk;
    }
    report.conclusion_ok = same && mass >= 0.95 && monotone;
    report.notes.push_back("stable windows " + std::to_string(stable.size()) + "/" +
                           std::to_string(target.size()) + " target, limit mass " +
                           std::to_string(mass));
  } else {
    const double threshold = report.sink_metric[report.best_sink] - *opt.delta_bar - 1e-12;
    auto sink_of = sink_membership(graph, sinks);
    bool ok = true;
    for (long s = 0; s < meta.num_profiles(); ++s) {
      if (st.profile_mass_limit[s] <= opt.mass_threshold) continue;
      const int q = sink_of[s];
      const double metric = q >= 0 ? report.sink_metric[q] : 0.0;
      if (metric < threshold) {
        ok = false;
        report.notes.push_back("profile " + meta.profile_label(s) + " survives with metric " +
                               std::to_string(metric));
      }
    }
    report.conclusion_ok = ok;
  }
  return report;
}

}  // namespace sinkrank
