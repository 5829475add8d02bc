#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "oracle.hpp"
#include "tradeband/band_solver.hpp"

namespace tb = tradeband;

namespace {

const tb::OuParams kDesk{0.01, 0.01};

tb::EdgePair pair_from_q(double q1, double q2, const tb::OuParams& params) {
  tb::EdgePair pair;
  pair.p1 = tb::from_dimensionless(q1, params);
  pair.p2 = tb::from_dimensionless(q2, params);
  return pair;
}

}  // namespace

TEST(ExitFunctionals, BoundaryValues) {
  for (auto [q1, q2] : {std::pair{0.5, -0.5}, std::pair{2.0, -1.0}, std::pair{-0.5, -3.0}}) {
    const auto pair = pair_from_q(q1, q2, kDesk);
    const auto top = tb::exit_functionals(pair.p1, pair, kDesk);
    const auto bottom = tb::exit_functionals(pair.p2, pair, kDesk);
    EXPECT_NEAR(top.gain, 0.0, 1e-8);
    EXPECT_NEAR(bottom.gain, 0.0, 1e-8);
    EXPECT_NEAR(top.occupation, 0.0, 1e-8);
    EXPECT_NEAR(bottom.occupation, 0.0, 1e-8);
    EXPECT_NEAR(top.exit_low, 0.0, 1e-8);
    EXPECT_NEAR(bottom.exit_low, 1.0, 1e-8);
  }
}

TEST(ExitFunctionals, RejectsPointsOutsideTheInterval) {
  const auto pair = pair_from_q(0.5, -0.5, kDesk);
  EXPECT_THROW(tb::exit_functionals(pair.p1 + 1e-3, pair, kDesk), std::invalid_argument);
  EXPECT_THROW(tb::kolmogorov_residuals(pair.p1, pair, kDesk), std::invalid_argument);
  EXPECT_THROW(tb::exit_functionals(0.0, pair_from_q(-0.5, 0.5, kDesk), kDesk),
               std::invalid_argument);
}

TEST(ExitFunctionals, ResidualsAtTwentyInteriorPoints) {
  const auto pair = pair_from_q(0.5, -0.5, kDesk);
  for (int i = 1; i <= 20; ++i) {
    const double p = pair.p2 + (pair.p1 - pair.p2) * i / 21.0;
    const auto r = tb::kolmogorov_residuals(p, pair, kDesk);
    EXPECT_LT(std::fabs(r.gain), 1e-4) << p;
    EXPECT_LT(std::fabs(r.occupation), 1e-4) << p;
    EXPECT_LT(std::fabs(r.exit_low), 1e-4) << p;
  }
}

TEST(ExitFunctionals, ExitProbabilityDecreases) {
  const auto pair = pair_from_q(1.5, -2.0, kDesk);
  double prev = 1.0;
  for (int i = 1; i < 50; ++i) {
    const double p = pair.p2 + (pair.p1 - pair.p2) * i / 50.0;
    const double e = tb::exit_functionals(p, pair, kDesk).exit_low;
    EXPECT_LT(e, prev);
    EXPECT_GT(e, 0.0);
    prev = e;
  }
}

TEST(ExitFunctionals, ExitProbabilityMatchesOracle) {
  // P(q) = int_{q1}^{q} e^{x^2} / int_{q1}^{q2} e^{x^2}.
  const double q1 = 1.2, q2 = -0.7;
  const auto pair = pair_from_q(q1, q2, kDesk);
  for (double q = -0.6; q < 1.2; q += 0.3) {
    const double expected =
        static_cast<double>(oracle::exp_plus(q1, q) / oracle::exp_plus(q1, q2));
    EXPECT_NEAR(tb::exit_functionals(tb::from_dimensionless(q, kDesk), pair, kDesk).exit_low,
                expected, 1e-12);
  }
}

TEST(ExitFunctionals, OccupationIsPositiveInside) {
  const auto pair = pair_from_q(0.8, -1.1, kDesk);
  for (int i = 1; i < 20; ++i) {
    const double p = pair.p2 + (pair.p1 - pair.p2) * i / 20.0;
    EXPECT_GT(tb::exit_functionals(p, pair, kDesk).occupation, 0.0);
  }
}

TEST(ExitFunctionals, AnalyticDerivativesMatchFiniteDifferences) {
  const auto pair = pair_from_q(1.0, -1.5, kDesk);
  for (int i = 1; i < 10; ++i) {
    const double p = pair.p2 + (pair.p1 - pair.p2) * i / 10.0;
    const double h = 1e-5 * (pair.p1 - pair.p2);
    const auto plus = tb::exit_functionals(p + h, pair, kDesk);
    const auto minus = tb::exit_functionals(p - h, pair, kDesk);
    const auto d = tb::exit_functionals_derivative(p, pair, kDesk);
    EXPECT_NEAR(d.gain, (plus.gain - minus.gain) / (2 * h), 1e-5 * std::max(1.0, std::fabs(d.gain)));
    EXPECT_NEAR(d.occupation, (plus.occupation - minus.occupation) / (2 * h),
                1e-5 * std::max(1.0, std::fabs(d.occupation)));
    EXPECT_NEAR(d.exit_low, (plus.exit_low - minus.exit_low) / (2 * h),
                1e-5 * std::max(1.0, std::fabs(d.exit_low)));
  }
}

TEST(KolmogorovProperty, ResidualsAcrossAMatrixOfIntervals) {
  const double q1s[] = {-1.0, 0.0, 0.5, 1.5, 3.0};
  const double gaps[] = {0.2, 0.8, 1.5, 2.5, 4.0};
  for (double q1 : q1s) {
    for (double gap : gaps) {
      const auto pair = pair_from_q(q1, q1 - gap, kDesk);
      for (int i = 1; i <= 20; ++i) {
        const double p = pair.p2 + (pair.p1 - pair.p2) * i / 21.0;
        const auto r = tb::kolmogorov_residuals(p, pair, kDesk);
        EXPECT_LT(std::max({std::fabs(r.gain), std::fabs(r.occupation), std::fabs(r.exit_low)}),
                  1e-4)
            << q1 << " " << gap << " " << i;
      }
    }
  }
}

TEST(KolmogorovProperty, SolvedPairsSatisfyTheBoundaryOptimality) {
  // d/dp [gain - edge * occupation - 2 Gamma exit_low] vanishes at both ends
  // of a solved pair: the marginal trade at the edge breaks even.
  for (double ratio : {1e-3, 0.1, 1.0}) {
    const auto costs = tb::costs_for_ratio(ratio, kDesk);
    for (double p : {0.0, 0.05, -0.1, 0.2}) {
      const auto pair = tb::solve_p2(p, kDesk, costs);
      if (tb::to_dimensionless(pair.p2, kDesk) < -4.0) continue;
      for (double at : {pair.p1, pair.p2}) {
        const auto d = tb::exit_functionals_derivative(at, pair, kDesk);
        const double terms[] = {d.gain, pair.edge * d.occupation, 2 * costs.gamma * d.exit_low};
        const double scale = std::max({std::fabs(terms[0]), std::fabs(terms[1]), std::fabs(terms[2])});
        EXPECT_NEAR(terms[0] - terms[1] - terms[2], 0.0, 1e-8 * scale)
            << "ratio " << ratio << " p " << p << " at " << at;
      }
    }
  }
}
