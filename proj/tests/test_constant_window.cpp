#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "swcorr/constant_window.hpp"
#include "swcorr/synthetic.hpp"

using namespace swcorr;

namespace {

bool brute_force_constant(const Grid<double>& g, const std::vector<std::size_t>& idx, const WindowSpec& w) {
  bool constant = true;
  const double first = g[g.flat_index(std::span<const std::size_t>(idx))];
  oracle::for_each_in_window(g.shape(), idx, w, [&](std::size_t s) { constant = constant && g[s] == first; });
  return constant;
}

}  // namespace

TEST(ConstantWindow, MatchesBruteForceOnBlockyData) {
  for (const auto& [shape, lengths] : std::vector<std::pair<Shape, std::vector<std::size_t>>>{
           {{40}, {5}}, {{13, 11}, {3, 3}}, {{9, 10, 11}, {3, 3, 5}}, {{9, 9}, {9, 1}}, {{12, 12}, {1, 1}}}) {
    // Values in {0, 1} with long runs, so constant windows are common.
    Grid<double> g(shape);
    synthetic::Uniform u(5);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = u() < 0.08 ? 1.0 : 0.0;
    const WindowSpec w(lengths);
    const auto mask = constant_window_mask(g, w, 3);
    std::size_t constants = 0;
    for (std::size_t f = 0; f < g.size(); ++f) {
      const auto idx = oracle::unflatten(shape, f);
      if (!oracle::interior(shape, idx, w)) continue;
      const bool want = brute_force_constant(g, idx, w);
      EXPECT_EQ(mask[f], want ? 1 : 0) << "flat " << f;
      constants += want;
    }
    EXPECT_GT(constants, 0u);
  }
}

TEST(ConstantWindow, FindsPatch) {
  auto g = synthetic::random({16, 16}, 8);
  for (std::size_t i = 4; i < 9; ++i)
    for (std::size_t j = 6; j < 11; ++j) g.at({i, j}) = 5.0;
  const auto values = constant_window_values(g, WindowSpec({5, 5}));
  EXPECT_EQ(values.at({6, 8}), 5.0);
  const auto mask = constant_window_mask(g, WindowSpec({5, 5}));
  for (std::size_t i = 2; i < 14; ++i)
    for (std::size_t j = 2; j < 14; ++j) EXPECT_EQ(mask.at({i, j}), (i == 6 && j == 8) ? 1 : 0);
}

TEST(ConstantWindow, RowsConstantButDifferentIsNotConstant) {
  // Each row is constant but rows differ: constant along axis 1 only.
  Grid<float> g({5, 5});
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j) g.at({i, j}) = static_cast<float>(i);
  const auto mask = constant_window_mask(g, WindowSpec({3, 3}));
  EXPECT_EQ(mask.at({2, 2}), 0);
  EXPECT_EQ(constant_window_mask(g, WindowSpec({1, 5})).at({2, 2}), 1);
}

TEST(ConstantWindow, ThreadCountDoesNotChangeResult) {
  Grid<double> g({31, 17});
  synthetic::Uniform u(2);
  for (auto& v : g.values()) v = u() < 0.1 ? 1.0 : 0.0;
  const WindowSpec w({3, 5});
  EXPECT_EQ(constant_window_mask(g, w, 1), constant_window_mask(g, w, 4));
}
