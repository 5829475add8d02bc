#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "tradeband/log_scaled.hpp"

using tradeband::LogScaled;

TEST(LogScaled, DefaultIsZero) {
  LogScaled z;
  EXPECT_TRUE(z.is_zero());
  EXPECT_EQ(z.to_double(), 0.0);
  EXPECT_TRUE(LogScaled(0.0).is_zero());
}

TEST(LogScaled, RoundTripsDoubles) {
  for (double x : {1.0, -2.5, 1e-300, -3e300, 0.125}) {
    // exp(log x) carries |log x| ulps of relative error.
    EXPECT_NEAR(LogScaled(x).to_double(), x, 4e-13 * std::fabs(x));
  }
}

TEST(LogScaled, RejectsNonFinite) {
  EXPECT_THROW(LogScaled(std::numeric_limits<double>::infinity()), std::invalid_argument);
  EXPECT_THROW(LogScaled(std::nan("")), std::invalid_argument);
}

TEST(LogScaled, ArithmeticMatchesDoubles) {
  const LogScaled a(3.0), b(-1.25);
  EXPECT_DOUBLE_EQ((a + b).to_double(), 1.75);
  EXPECT_DOUBLE_EQ((a - b).to_double(), 4.25);
  EXPECT_DOUBLE_EQ((a * b).to_double(), -3.75);
  EXPECT_DOUBLE_EQ((a / b).to_double(), -2.4);
  EXPECT_DOUBLE_EQ((-a).to_double(), -3.0);
  EXPECT_DOUBLE_EQ(b.abs().to_double(), 1.25);
}

TEST(LogScaled, HugeMagnitudesDoNotOverflow) {
  const LogScaled big = LogScaled::exp(2000.0);
  const LogScaled sum = big + big;
  EXPECT_NEAR(sum.log_magnitude(), 2000.0 + std::log(2.0), 1e-12);
  const LogScaled ratio = LogScaled::exp(2000.0) / LogScaled::exp(1999.0);
  EXPECT_NEAR(ratio.to_double(), std::exp(1.0), 1e-13);
  EXPECT_TRUE(std::isinf(big.to_double()));
  EXPECT_EQ(LogScaled::exp(-2000.0).to_double(), 0.0);
}

TEST(LogScaled, OrderingFollowsValue) {
  EXPECT_LT(LogScaled(-5.0), LogScaled(-1.0));
  EXPECT_LT(LogScaled(-1.0), LogScaled());
  EXPECT_LT(LogScaled(), LogScaled::exp(-800.0));
  EXPECT_LT(LogScaled::exp(10.0), LogScaled::exp(11.0));
  EXPECT_EQ(LogScaled(2.0), LogScaled::exp(std::log(2.0)));
}

TEST(LogScaled, SubtractFlagsCancellation) {
  const LogScaled a = LogScaled::exp(500.0);
  const LogScaled b = LogScaled::exp(500.0 + 1e-15);
  const auto d = tradeband::subtract(a, b);
  EXPECT_TRUE(d.cancelled);
  EXPECT_TRUE(d.value.is_zero());

  const auto e = tradeband::subtract(LogScaled(1.0), LogScaled(0.5));
  EXPECT_FALSE(e.cancelled);
  EXPECT_DOUBLE_EQ(e.value.to_double(), 0.5);
}

TEST(LogScaled, LogAdd) {
  EXPECT_NEAR(tradeband::log_add(0.0, 0.0), std::log(2.0), 1e-15);
  EXPECT_NEAR(tradeband::log_add(1000.0, 0.0), 1000.0, 1e-15);
  const double inf = std::numeric_limits<double>::infinity();
  EXPECT_EQ(tradeband::log_add(-inf, 3.0), 3.0);
}

TEST(LogScaledProperty, AdditionIsAssociativeToRounding) {
  for (int i = 0; i < 50; ++i) {
    const double x = std::sin(i) * 40.0, y = std::cos(3.0 * i) * 40.0, z = i - 25.0;
    const LogScaled a = LogScaled::exp(x), b = LogScaled::exp(y), c(z);
    const double lhs = ((a + b) + c).log_magnitude();
    const double rhs = (a + (b + c)).log_magnitude();
    EXPECT_NEAR(lhs, rhs, 1e-12 * std::max(1.0, std::fabs(lhs))) << i;
  }
}
