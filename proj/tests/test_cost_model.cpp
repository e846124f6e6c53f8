#include <gtest/gtest.h>

#include <cmath>

#include "swcorr/cost_model.hpp"

using namespace swcorr;
using namespace swcorr::cost;

TEST(CostModel, NaiveExact) {
  EXPECT_EQ(ops_naive(7, 1000, 1000), 492ull * 988036ull);
  EXPECT_EQ(ops_naive(1, 10, 10), 1200ull);
  EXPECT_THROW(ops_naive(11, 10, 10), ParameterError);
  EXPECT_THROW(ops_naive(4, 10, 10), ParameterError);
}

TEST(CostModel, SeparableExact) {
  EXPECT_EQ(sm_ops(7, 100, 100), 38600ull);
  EXPECT_EQ(ops_separable(7, 100, 100), 353000ull);
  EXPECT_THROW(ops_separable(7, 5, 100), ParameterError);
}

TEST(CostModel, AsymptoticallyThirtySixPerElement) {
  const double per_element = static_cast<double>(ops_separable(7, 10000, 10000)) / 1e8;
  EXPECT_NEAR(per_element, 36.0, 0.36);
  EXPECT_NEAR(ops_separable_approx(10000, 10000) / 1e8, 36.0, 1e-12);
}

TEST(CostModel, RatioForSevenBySeven) {
  const double r = predict_ratio(7, 4096, 4096);
  EXPECT_GE(r, 13.0);
  EXPECT_LE(r, 14.0);
  EXPECT_NEAR(490.0 / 36.0, 13.61, 0.01);
  // 4064 x 3072 evaluates to 6121379376 / 449196128.
  EXPECT_NEAR(predict_ratio(7, 4064, 3072), 13.6274, 1e-4);
}

TEST(CostModel, RatioScalesWithWindowArea) {
  EXPECT_NEAR(predict_ratio(3, 100000, 100000), 92.0 / 36.0, 0.01);
  EXPECT_NEAR(predict_ratio(15, 100000, 100000), 2252.0 / 36.0, 0.1);
}

TEST(CostModel, SeparableNearlyIndependentOfWindow) {
  for (std::uint64_t a : {100ull, 512ull, 4096ull})
    for (std::uint64_t b : {64ull, 1000ull}) {
      const auto lhs = ops_separable(3, a, b);
      const auto rhs = ops_separable(15, a, b);
      EXPECT_LE(lhs - rhs, 5 * (a + b) * 12);
    }
}

TEST(CostModel, NaiveGrowsQuadratically) {
  const std::uint64_t a = 2000, b = 1500;
  for (std::uint64_t m = 2; m <= 8; ++m) {
    const std::uint64_t n = 2 * m + 1;
    const double got = static_cast<double>(ops_naive(n, a, b)) / static_cast<double>(ops_naive(3, a, b));
    const double windows = static_cast<double>((a - n + 1) * (b - n + 1)) /
                           static_cast<double>((a - 2) * (b - 2));
    EXPECT_NEAR(got, (10.0 * n * n + 2) / 92.0 * windows, 1e-9 * got);
  }
  const auto c = count_ops(7, 100, 100);
  EXPECT_EQ(c.sm_ops, 38600ull);
  EXPECT_DOUBLE_EQ(c.ratio, static_cast<double>(c.naive_ops) / 353000.0);
}
