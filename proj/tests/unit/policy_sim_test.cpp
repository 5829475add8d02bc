#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <vector>

#include "tradeband/policy_sim.hpp"

namespace tb = tradeband;

namespace {

const tb::OuParams kDesk{0.01, 0.01};

tb::BandCurve small_curve() {
  tb::BandCurve curve;
  curve.params = kDesk;
  curve.costs = tb::CostParams{1.0};
  curve.points = {{-1.0, -1.5, -0.5}, {0.0, -0.2, 0.2}, {1.0, 0.5, 1.6}};
  return curve;
}

double combined(const tb::SimResult& a, const tb::SimResult& b) {
  return std::sqrt(a.std_error * a.std_error + b.std_error * b.std_error);
}

}  // namespace

TEST(Policy, ConstantBand) {
  const auto policy = tb::Policy::constant_band(0.4);
  EXPECT_TRUE(policy.is_constant());
  const auto e = policy.edges_at(1.0);
  EXPECT_DOUBLE_EQ(e.lower, 0.8);
  EXPECT_DOUBLE_EQ(e.upper, 1.2);
  EXPECT_THROW(tb::Policy::constant_band(-0.1), std::invalid_argument);
  EXPECT_FALSE(policy.description().empty());
}

TEST(Policy, ApplyHoldsInsideAndTradesToTheNearerEdge) {
  const auto policy = tb::Policy::constant_band(0.4);
  EXPECT_EQ(tb::apply_policy(0.9, 1.0, policy), 0.9);
  EXPECT_DOUBLE_EQ(tb::apply_policy(1.2 + 1.0, 1.0, policy), 1.2);
  EXPECT_DOUBLE_EQ(tb::apply_policy(-3.0, 1.0, policy), 0.8);
}

TEST(Policy, ZeroWidthFollowsThePredictor) {
  const auto policy = tb::Policy::constant_band(0.0);
  for (double p : {-0.3, 0.0, 0.17}) EXPECT_EQ(tb::apply_policy(5.0, p, policy), p);
}

TEST(Policy, AnalyticBandInterpolatesLinearly) {
  const auto policy = tb::Policy::analytic_band(small_curve());
  EXPECT_FALSE(policy.is_constant());
  const auto mid = policy.edges_at(0.5);
  EXPECT_DOUBLE_EQ(mid.lower, 0.15);
  EXPECT_DOUBLE_EQ(mid.upper, 0.9);
  const auto node = policy.edges_at(-1.0);
  EXPECT_DOUBLE_EQ(node.lower, -1.5);
  EXPECT_DOUBLE_EQ(node.upper, -0.5);
}

TEST(Policy, AnalyticBandRefusesFarExtrapolation) {
  const auto policy = tb::Policy::analytic_band(small_curve());
  EXPECT_NO_THROW(policy.edges_at(1.9));
  EXPECT_NO_THROW(policy.edges_at(-1.9));
  EXPECT_THROW(policy.edges_at(2.01), tb::ExtrapolationError);
  EXPECT_THROW(policy.edges_at(-2.01), tb::ExtrapolationError);
  tb::BandCurve one = small_curve();
  one.points.resize(1);
  EXPECT_THROW(tb::Policy::analytic_band(one), std::invalid_argument);
}

TEST(Policy, NonUniformGridLookup) {
  tb::BandCurve curve = small_curve();
  curve.points = {{-1.0, -1.5, -0.5}, {0.2, -0.1, 0.3}, {1.0, 0.5, 1.6}};
  const auto policy = tb::Policy::analytic_band(curve);
  EXPECT_DOUBLE_EQ(policy.edges_at(0.2).lower, -0.1);
  EXPECT_DOUBLE_EQ(policy.edges_at(0.6).upper, 0.95);
}

TEST(PnlStep, Arithmetic) {
  const auto zero = tb::pnl_step(0.0, 0.0, 3.0, tb::CostParams{1.0});
  EXPECT_EQ(zero.gain, 0.0);
  EXPECT_EQ(zero.risk, 0.0);
  EXPECT_EQ(zero.cost, 0.0);
  const auto a = tb::pnl_step(1.0, 0.0, 2.0, tb::CostParams{0.5});
  EXPECT_DOUBLE_EQ(a.gain, 2.0);
  EXPECT_DOUBLE_EQ(a.risk, 0.5);
  EXPECT_DOUBLE_EQ(a.cost, 0.5);
  const auto b = tb::pnl_step(-1.0, 1.0, 0.0, tb::CostParams{1.0});
  EXPECT_DOUBLE_EQ(b.gain, 0.0);
  EXPECT_DOUBLE_EQ(b.risk, 0.5);
  EXPECT_DOUBLE_EQ(b.cost, 2.0);
}

TEST(Simulate, MatchesAHandRolledLoop) {
  const tb::CostParams costs{0.3};
  const auto policy = tb::Policy::constant_band(0.05);
  const auto paths = tb::sample_paths(kDesk, 3, 500, 21);
  const auto r = tb::evaluate_policy(policy, paths, costs);
  std::vector<double> totals;
  for (const auto& path : paths) {
    ASSERT_EQ(path.values.size(), 501u);
    EXPECT_EQ(path.values[0], 0.0);
    double pi = 0.0, total = 0.0;
    for (std::size_t t = 1; t < path.values.size(); ++t) {
      const double next = tb::apply_policy(pi, path.values[t], policy);
      const auto s = tb::pnl_step(next, pi, path.values[t], costs);
      total += s.gain - s.risk - s.cost;
      pi = next;
    }
    totals.push_back(total);
  }
  const double mean = (totals[0] + totals[1] + totals[2]) / 3.0;
  EXPECT_NEAR(r.mean_pnl, mean, 1e-12);
  EXPECT_EQ(r.n_paths, 3u);
  EXPECT_EQ(r.path_length, 500u);
}

TEST(Simulate, DecompositionAndDeterminism) {
  const auto costs = tb::costs_for_ratio(0.1, kDesk);
  const auto policy = tb::Policy::constant_band(0.1);
  const auto a = tb::simulate(policy, kDesk, costs, 8, 2000, 5);
  const auto b = tb::simulate(policy, kDesk, costs, 8, 2000, 5);
  EXPECT_EQ(a.mean_pnl, b.mean_pnl);
  EXPECT_EQ(a.std_error, b.std_error);
  EXPECT_NEAR(a.mean_pnl, a.mean_gain - a.mean_risk - a.mean_cost, 1e-10);
  EXPECT_GE(a.std_error, 0.0);
  EXPECT_THROW(tb::simulate(policy, kDesk, costs, 1, 100, 5), std::invalid_argument);
}

TEST(Simulate, IndependentOfThreadCount) {
  const auto costs = tb::costs_for_ratio(0.2, kDesk);
  const auto policy = tb::Policy::constant_band(0.08);
  ::setenv("TRADEBAND_THREADS", "1", 1);
  const auto serial = tb::simulate(policy, kDesk, costs, 9, 3000, 77);
  ::setenv("TRADEBAND_THREADS", "4", 1);
  const auto parallel = tb::simulate(policy, kDesk, costs, 9, 3000, 77);
  ::unsetenv("TRADEBAND_THREADS");
  EXPECT_EQ(serial.mean_pnl, parallel.mean_pnl);
  EXPECT_EQ(serial.std_error, parallel.std_error);
}

TEST(Simulate, FrictionlessTrackingEarnsHalfTheVariancePerStep) {
  const std::size_t steps = 50000;
  const auto r = tb::simulate(tb::Policy::constant_band(0.0), kDesk, tb::CostParams{0.0}, 20,
                              steps, 8);
  const double bound = 0.5 * std::pow(tb::stationary_std(kDesk), 2) * steps;
  EXPECT_NEAR(bound, 125.6, 0.1);
  EXPECT_NEAR(r.mean_pnl, bound, 4 * r.std_error + 1.0);
  EXPECT_EQ(r.mean_cost, 0.0);
}

TEST(Simulate, HugeCostWideBandNeverTrades) {
  const auto r = tb::simulate(tb::Policy::constant_band(1e3), kDesk, tb::CostParams{1e6}, 4, 5000, 3);
  EXPECT_EQ(r.mean_pnl, 0.0);
  EXPECT_EQ(r.std_error, 0.0);
}

TEST(SimulateProperty, PositionNeverLeavesTheBand) {
  const auto costs = tb::costs_for_ratio(0.1, kDesk);
  const auto curve = tb::band_curve(tb::analytic_grid(kDesk, 101, 8.0), kDesk, costs);
  const auto policy = tb::Policy::analytic_band(curve);
  const auto path = tb::sample_path(kDesk, 0.0, 20000, 4);
  double pi = 0.0;
  for (std::size_t t = 1; t < path.values.size(); ++t) {
    pi = policy.apply(pi, path.values[t]);
    const auto e = policy.edges_at(path.values[t]);
    ASSERT_LE(e.lower, pi);
    ASSERT_LE(pi, e.upper);
  }
}

TEST(SimulateProperty, StandardErrorShrinksLikeRootN) {
  const auto costs = tb::costs_for_ratio(0.1, kDesk);
  const auto policy = tb::Policy::constant_band(0.1);
  const auto small = tb::simulate(policy, kDesk, costs, 100, 2000, 1);
  const auto large = tb::simulate(policy, kDesk, costs, 400, 2000, 2);
  EXPECT_NEAR(small.std_error / large.std_error, 2.0, 0.4);
}

TEST(GridSearch, FrictionlessPicksTheNarrowestBand) {
  const std::vector<double> candidates = {0.0, 0.01, 0.05, 0.2};
  const auto r = tb::grid_search_constant_band(kDesk, tb::CostParams{0.0}, candidates, 4, 2000, 9);
  EXPECT_EQ(r.best_width, 0.0);
  EXPECT_EQ(r.training_means.size(), candidates.size());
}

TEST(GridSearch, TiesGoToTheWiderBand) {
  // All three never trade, so every training mean is exactly zero.
  const std::vector<double> candidates = {50.0, 100.0, 75.0};
  const auto r = tb::grid_search_constant_band(kDesk, tb::CostParams{1.0}, candidates, 3, 1000, 9);
  EXPECT_EQ(r.best_width, 100.0);
  EXPECT_EQ(r.result.mean_pnl, 0.0);
}

TEST(GridSearch, RejectsBadCandidates) {
  EXPECT_THROW(tb::grid_search_constant_band(kDesk, tb::CostParams{1.0}, std::vector<double>{}, 3,
                                             100, 1),
               std::invalid_argument);
  EXPECT_THROW(tb::grid_search_constant_band(kDesk, tb::CostParams{1.0},
                                             std::vector<double>{0.1, -0.1}, 3, 100, 1),
               std::invalid_argument);
}

TEST(GridSearch, TrainingAndEvaluationPathsAreDisjoint) {
  EXPECT_NE(tb::training_seed(42), 42u);
  const auto train = tb::sample_paths(kDesk, 2, 10, tb::training_seed(42));
  const auto eval = tb::sample_paths(kDesk, 2, 10, 42);
  EXPECT_NE(train[0].values, eval[0].values);
  EXPECT_NE(train[1].values, eval[0].values);
}

TEST(GridSearch, DefaultCandidates) {
  const double sigma = tb::stationary_std(kDesk);
  const auto c = tb::default_width_candidates(kDesk, 0.123);
  ASSERT_EQ(c.size(), 61u);
  EXPECT_TRUE(std::is_sorted(c.begin(), c.end()));
  EXPECT_NEAR(c.front(), 1e-3 * sigma, 1e-15);
  EXPECT_NEAR(c.back(), 20 * sigma, 1e-12);
  EXPECT_NE(std::find(c.begin(), c.end(), 0.123), c.end());
}

TEST(AnalyticGrid, SpansEightSigmaWithAnExactZero) {
  const auto g = tb::analytic_grid(kDesk);
  ASSERT_EQ(g.size(), 401u);
  EXPECT_EQ(g[200], 0.0);
  EXPECT_NEAR(g.front(), -8 * tb::stationary_std(kDesk), 1e-15);
  EXPECT_NEAR(g.back(), 8 * tb::stationary_std(kDesk), 1e-15);
}

TEST(Compare, ZeroCostIsRejected) {
  EXPECT_THROW(tb::compare(kDesk, tb::CostParams{0.0}, 2, 100, 1), std::invalid_argument);
}

TEST(Compare, OptimalBandIsNotBeatenOnPairedPaths) {
  const auto row = tb::compare(kDesk, tb::costs_for_ratio(0.2, kDesk), 40, 20000, 31);
  EXPECT_NEAR(row.ratio, 0.2, 1e-12);
  EXPECT_GE(row.optimal.mean_pnl, row.grid.mean_pnl - 2 * combined(row.optimal, row.grid));
  EXPECT_GT(row.best_width, 0.0);
}

TEST(CompareProperty, OptimalBeatsEveryConstantWidth) {
  const auto costs = tb::costs_for_ratio(0.3, kDesk);
  const auto paths = tb::sample_paths(kDesk, 100, 10000, 12);
  const auto curve = tb::band_curve(tb::analytic_grid(kDesk), kDesk, costs);
  const auto optimal = tb::evaluate_policy(tb::Policy::analytic_band(curve), paths, costs);
  const double sigma = tb::stationary_std(kDesk);
  for (double k : {0.5, 1.0, 2.0, 3.0, 5.0}) {
    const auto constant = tb::evaluate_policy(tb::Policy::constant_band(k * sigma), paths, costs);
    EXPECT_GE(optimal.mean_pnl, constant.mean_pnl - 3 * combined(optimal, constant)) << k;
  }
}
