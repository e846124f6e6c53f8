#pragma once

#include <cstdint>
#include <string>

#include "swcorr/errors.hpp"

namespace swcorr::cost {

// Arithmetic-operation tallies for a 2-D A x B grid and an n x n window.
struct OpCount {
  std::uint64_t naive_ops = 0;
  std::uint64_t separable_ops = 0;
  std::uint64_t sm_ops = 0;
  double ratio = 0.0;
};

inline void require_valid(std::uint64_t n, std::uint64_t a, std::uint64_t b) {
  if (n == 0 || n % 2 == 0) throw ParameterError("window side must be odd, got " + std::to_string(n));
  if (n > a || n > b)
    throw ParameterError("window side " + std::to_string(n) + " exceeds grid " + std::to_string(a) +
                         "x" + std::to_string(b));
}

// Per window: 2n^2 (means) + 2n^2 (centering) + n^2 + n^2 (numerator)
// + 2n^2 (squares) + 2n^2 (sums) + 2 (sqrt, divide), over (A-n+1)(B-n+1) windows.
inline std::uint64_t ops_naive(std::uint64_t n, std::uint64_t a, std::uint64_t b) {
  require_valid(n, a, b);
  return (10 * n * n + 2) * (a - n + 1) * (b - n + 1);
}

// Two sliding-sum passes: A rows of B additions + (B-n) subtractions, then
// B columns of A additions + (A-n) subtractions.
inline std::uint64_t sm_ops(std::uint64_t n, std::uint64_t a, std::uint64_t b) {
  require_valid(n, a, b);
  return a * (2 * b - n) + b * (2 * a - n);
}

// 16*A*B element-wise operations plus five window sums.
inline std::uint64_t ops_separable(std::uint64_t n, std::uint64_t a, std::uint64_t b) {
  return 16 * a * b + 5 * sm_ops(n, a, b);
}

// Leading-order forms: 10*n^2*A*B and 36*A*B.
inline double ops_naive_approx(std::uint64_t n, std::uint64_t a, std::uint64_t b) {
  return 10.0 * static_cast<double>(n * n) * static_cast<double>(a) * static_cast<double>(b);
}
inline double ops_separable_approx(std::uint64_t a, std::uint64_t b) {
  return 36.0 * static_cast<double>(a) * static_cast<double>(b);
}

inline double predict_ratio(std::uint64_t n, std::uint64_t a, std::uint64_t b) {
  return static_cast<double>(ops_naive(n, a, b)) / static_cast<double>(ops_separable(n, a, b));
}

inline OpCount count_ops(std::uint64_t n, std::uint64_t a, std::uint64_t b) {
  OpCount c;
  c.naive_ops = ops_naive(n, a, b);
  c.sm_ops = sm_ops(n, a, b);
  c.separable_ops = ops_separable(n, a, b);
  c.ratio = static_cast<double>(c.naive_ops) / static_cast<double>(c.separable_ops);
  return c;
}

}  // namespace swcorr::cost
