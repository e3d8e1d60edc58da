#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "fixtures.hpp"
#include "sinkrank/sbrd.hpp"

using namespace sinkrank;

TEST_CASE("schedule defaults and validation") {
  FeasibleFunction f = default_feasible(2, 2, 0.1, uniform_weights(2));
  CHECK(f.effective_base() == doctest::Approx(4.0));  // v*n - n + 2
  CHECK(f.eval_mean(0.0) == doctest::Approx(1.0));
  CHECK(f.eval_mean(0.1) == doctest::Approx(4.0));
  CHECK(f.eval_mean(0.05) == doctest::Approx(2.0));

  FeasibleFunction slow = f;
  slow.base = 3.0;  // equals v*n - n + 1: growth too slow
  CHECK_THROWS_AS(slow.validate(), std::runtime_error);
  slow.base = 3.5;
  CHECK_NOTHROW(slow.validate());
  FeasibleFunction bad = f;
  bad.delta = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::runtime_error);
}

TEST_CASE("schedule evaluates the mean weighted column payoff") {
  FeasibleFunction f = default_feasible(1, 2, 0.2, uniform_weights(2));
  Eigen::MatrixXd window(2, 3);
  window << 0.2, 0.4, 0.6,
            0.0, 0.2, 0.4;
  // column means 0.1, 0.3, 0.5 -> overall 0.3; default base here is 2
  CHECK(f.eval(window) == doctest::Approx(f.eval_mean(0.3)));
  CHECK(f.eval(window) == doctest::Approx(std::pow(2.0, 0.3 / 0.2)));
  Eigen::MatrixXd wrong(3, 2);
  wrong.setZero();
  CHECK_THROWS_AS(f.eval(wrong), std::runtime_error);
}

TEST_CASE("initial history: m copies with a zeroed payoff window") {
  MetaGame meta = fixtures::leaky();
  SBRDContext ctx = make_context(meta, uniform_weights(2));
  SBRDConfig cfg;
  cfg.m = 3;
  HistoryState st = initial_history(ctx, cfg, 4);
  CHECK(st.window == std::vector<long>{4, 4, 4});
  CHECK(st.payoffs.isZero(0.0));
  CHECK(st.std_errs.isZero(0.0));

  cfg.m = 0;
  CHECK_THROWS_AS(initial_history(ctx, cfg, 0), std::runtime_error);
  cfg.m = 2;
  CHECK_THROWS_AS(initial_history(ctx, cfg, 99), std::out_of_range);
}

TEST_CASE("unperturbed branches on a game with two singleton sinks") {
  MetaGame meta = fixtures::leaky();
  SBRDContext ctx = make_context(meta, uniform_weights(2));
  SBRDConfig cfg;
  cfg.m = 2;
  cfg.epsilon = 0.0;
  FeasibleFunction f = default_feasible(2, 2, 0.1, uniform_weights(2));

  SUBCASE("at a strict equilibrium the history repeats the profile") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      cfg.seed = seed;
      HistoryState st = initial_history(ctx, cfg, 0);
      StepRecord rec = sbrd_step(ctx, cfg, f, st, 1);
      CHECK(rec.branch == HistoryBranch::kPneRepeat);
      CHECK(rec.eps_bar == 0.0);
      CHECK(st.window == std::vector<long>{0, 0});
      // kappa from the zero initial window is base^0 = 1
      CHECK(rec.kappa == doctest::Approx(1.0));
      // the appended column now records the table row
      CHECK(st.payoffs.col(1)[0] == doctest::Approx(0.2));
      CHECK(st.payoffs.col(1)[1] == doctest::Approx(0.2));
    }
  }

  SUBCASE("strict improvement appends, ties leave the window alone") {
    // Profile 2 = (a1,b3): the row agent improves 0 -> 0.198 by switching to
    // a3; the column agent is already best responding (tie between b1, b3).
    bool saw_improve = false, saw_stay = false;
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      cfg.seed = seed;
      HistoryState st = initial_history(ctx, cfg, 2);
      StepRecord rec = sbrd_step(ctx, cfg, f, st, 1);
      if (rec.selected_agent == 0) {
        CHECK(rec.branch == HistoryBranch::kImproveAppend);
        CHECK(rec.next_profile == 8);
        CHECK(st.window == std::vector<long>{2, 8});
        saw_improve = true;
      } else {
        CHECK(rec.branch == HistoryBranch::kStay);
        CHECK(st.window == std::vector<long>{2, 2});
        CHECK((rec.next_profile == 0 || rec.next_profile == 2));
        saw_stay = true;
      }
      CHECK(std::count(rec.explored.begin(), rec.explored.end(), 1) == 0);
    }
    CHECK(saw_improve);
    CHECK(saw_stay);
  }

  SUBCASE("both agents improve from the dominated middle profile") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      cfg.seed = seed;
      HistoryState st = initial_history(ctx, cfg, 1);  // (a1,b2)
      StepRecord rec = sbrd_step(ctx, cfg, f, st, 1);
      CHECK(rec.branch == HistoryBranch::kImproveAppend);
      if (rec.selected_agent == 0)
        CHECK(rec.next_profile == 7);  // (a3,b2)
      else
        CHECK((rec.next_profile == 0 || rec.next_profile == 2));
    }
  }
}

TEST_CASE("steps are reproducible for a fixed seed") {
  MetaGame meta = fixtures::cyclic_nine();
  SBRDContext ctx = make_context(meta, uniform_weights(2));
  SBRDConfig cfg;
  cfg.m = 3;
  cfg.epsilon = 0.05;
  cfg.seed = 42;
  FeasibleFunction f = default_feasible(1, 2, 0.5, uniform_weights(2));

  auto trace = [&](std::vector<StepRecord>& recs, HistoryState& st) {
    st = initial_history(ctx, cfg, 3);
    for (long tau = 1; tau <= 200; ++tau) recs.push_back(sbrd_step(ctx, cfg, f, st, tau));
  };
  std::vector<StepRecord> a, b;
  HistoryState sa, sb;
  trace(a, sa);
  trace(b, sb);
  REQUIRE(a.size() == b.size());
  for (size_t k = 0; k < a.size(); ++k) {
    CHECK(a[k].selected_agent == b[k].selected_agent);
    CHECK(a[k].next_profile == b[k].next_profile);
    CHECK(a[k].branch == b[k].branch);
    CHECK(a[k].kappa == b[k].kappa);
  }
  CHECK(sa.window == sb.window);
}

TEST_CASE("epsilon outside [0,1) is rejected") {
  MetaGame meta = fixtures::leaky();
  SBRDContext ctx = make_context(meta, uniform_weights(2));
  SBRDConfig cfg;
  cfg.m = 1;
  cfg.epsilon = 1.0;
  FeasibleFunction f = default_feasible(2, 2, 0.1, uniform_weights(2));
  HistoryState st = initial_history(ctx, cfg, 0);
  CHECK_THROWS_AS(sbrd_step(ctx, cfg, f, st, 1), std::runtime_error);
}

TEST_CASE("exploration coins match their nominal rate") {
  MetaGame meta = fixtures::leaky();
  SBRDContext ctx = make_context(meta, uniform_weights(2));
  SBRDConfig cfg;
  cfg.m = 2;
  cfg.epsilon = 0.5;
  cfg.seed = 9;
  FeasibleFunction f = default_feasible(2, 2, 0.1, uniform_weights(2));

  // A fresh zero window keeps kappa = 1, so the effective rate is exactly 0.5.
  const int trials = 4000;
  int explored0 = 0, explored1 = 0, hist = 0, sel0 = 0, forced = 0;
  for (int tau = 1; tau <= trials; ++tau) {
    HistoryState st = initial_history(ctx, cfg, 4);
    StepRecord rec = sbrd_step(ctx, cfg, f, st, tau);
    CHECK(rec.eps_bar == doctest::Approx(0.5));
    explored0 += rec.explored[0];
    explored1 += rec.explored[1];
    hist += rec.history_explored;
    sel0 += rec.selected_agent == 0;
    if (rec.history_explored) {
      ++forced;
      CHECK(rec.branch == HistoryBranch::kForcedAppend);
      CHECK(st.window.back() == rec.next_profile);
    }
  }
  const double sigma4 = 4.0 * std::sqrt(0.25 / trials);  // four-sigma band
  CHECK(std::abs(explored0 / double(trials) - 0.5) < sigma4);
  CHECK(std::abs(explored1 / double(trials) - 0.5) < sigma4);
  CHECK(std::abs(hist / double(trials) - 0.5) < sigma4);
  CHECK(std::abs(sel0 / double(trials) - 0.5) < sigma4);
  CHECK(forced > 0);
}

TEST_CASE("windows inside a recurrent class are recognized") {
  MetaGame meta = fixtures::cyclic_nine();
  SBRDContext ctx = make_context(meta, uniform_weights(2));
  // Unique sink cycle 1 -> 4 -> 5 -> 2 -> 1.
  CHECK(window_in_rcc(ctx, {1, 4}, 0));
  CHECK(window_in_rcc(ctx, {4, 5}, 0));
  CHECK(window_in_rcc(ctx, {5, 2}, 0));
  CHECK(window_in_rcc(ctx, {2, 1}, 0));
  CHECK(window_in_rcc(ctx, {1, 4, 5}, 0));
  CHECK_FALSE(window_in_rcc(ctx, {1, 5}, 0));   // not an edge
  CHECK_FALSE(window_in_rcc(ctx, {1, 1}, 0));   // repetition off-equilibrium
  CHECK_FALSE(window_in_rcc(ctx, {0, 1}, 0));   // 0 is outside the sink
  CHECK_FALSE(window_in_rcc(ctx, {1, 4}, 3));   // no such sink
  CHECK(rcc_of_window(ctx, {1, 4}) == 0);
  CHECK(rcc_of_window(ctx, {0, 1}) == -1);
  CHECK(rcc_of_window(ctx, {1, 1}) == -1);

  MetaGame lk = fixtures::leaky();
  SBRDContext lctx = make_context(lk, uniform_weights(2));
  CHECK(window_in_rcc(lctx, {0, 0}, 0));  // strict equilibria repeat
  CHECK(window_in_rcc(lctx, {8, 8}, 1));
  CHECK(rcc_of_window(lctx, {8, 8, 8}) == 1);
  CHECK(rcc_of_window(lctx, {0, 8}) == -1);
}

TEST_CASE("unperturbed runs absorb into the cycle and stay there") {
  MetaGame meta = fixtures::cyclic_nine();
  SBRDContext ctx = make_context(meta, uniform_weights(2));
  SBRDConfig cfg;
  cfg.m = 3;
  cfg.epsilon = 0.0;
  FeasibleFunction f = default_feasible(1, 2, 0.1, uniform_weights(2));
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    cfg.seed = seed;
    RunSummary run = run_sbrd(ctx, cfg, f, 0, 500, 50);
    CHECK(run.absorption_step > 0);
    CHECK(run.absorbed_rcc == 0);
    CHECK(run.post_absorption_breaks == 0);
    CHECK(run.outside_sinks == 0.0);  // absorbed well before burn-in ends
    const double recorded = 500 - run.burn_in;
    CHECK(run.rcc_occupancy[0] == doctest::Approx(recorded));
    // Only cycle profiles are ever recorded after burn-in.
    for (long s : {0, 3, 6, 7, 8}) CHECK(run.profile_visits[s] == 0.0);
    CHECK(run.profile_visits.sum() == doctest::Approx(recorded));
  }
}

TEST_CASE("empirical mode caches one estimate per profile") {
  MetaGame meta = fixtures::leaky();
  std::vector<int> calls(static_cast<size_t>(meta.num_profiles()), 0);
  auto estimator = [&](long profile) {
    ++calls[static_cast<size_t>(profile)];
    PayoffEstimate est;
    est.mean = meta.payoffs.row(profile).transpose();
    est.std_err = Eigen::VectorXd::Constant(meta.num_agents, 1e-6);
    return est;
  };
  SBRDContext ctx = make_context(meta, uniform_weights(2), kTieTol, estimator);
  SBRDConfig cfg;
  cfg.m = 2;
  cfg.epsilon = 0.2;
  cfg.mode = SBRDMode::kEmpirical;
  cfg.seed = 5;
  FeasibleFunction f = default_feasible(2, 2, 0.1, uniform_weights(2));
  run_sbrd(ctx, cfg, f, 1, 400, 10);
  int touched = 0;
  for (int c : calls) {
    CHECK(c <= 1);
    touched += c;
  }
  CHECK(touched >= 2);  // the walk certainly saw more than one profile
}

TEST_CASE("empirical noise widens the strict-improvement margin") {
  MetaGame meta = fixtures::leaky();
  auto make = [&](double se) {
    return [&, se](long profile) {
      PayoffEstimate est;
      est.mean = meta.payoffs.row(profile).transpose();
      est.std_err = Eigen::VectorXd::Constant(meta.num_agents, se);
      return est;
    };
  };
  SBRDConfig cfg;
  cfg.m = 2;
  cfg.epsilon = 0.0;
  cfg.mode = SBRDMode::kEmpirical;
  FeasibleFunction f = default_feasible(2, 2, 0.1, uniform_weights(2));

  // Profile 1 = (a1,b2): the row agent's gain is 0.05. With per-profile
  // standard error 0.02 the required margin 3*sqrt(2)*0.02 = 0.085 swallows
  // the gain, so the window must not move; with 1e-6 noise it appends.
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    cfg.seed = seed;
    SBRDContext noisy = make_context(meta, uniform_weights(2), kTieTol, make(0.02));
    HistoryState st = initial_history(noisy, cfg, 1);
    StepRecord rec = sbrd_step(noisy, cfg, f, st, 1);
    if (rec.selected_agent == 0) CHECK(rec.branch == HistoryBranch::kStay);

    SBRDContext crisp = make_context(meta, uniform_weights(2), kTieTol, make(1e-6));
    HistoryState st2 = initial_history(crisp, cfg, 1);
    StepRecord rec2 = sbrd_step(crisp, cfg, f, st2, 1);
    if (rec2.selected_agent == 0) CHECK(rec2.branch == HistoryBranch::kImproveAppend);
  }
}
