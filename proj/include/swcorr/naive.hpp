#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "swcorr/errors.hpp"
#include "swcorr/grid.hpp"
#include "swcorr/parallel.hpp"
#include "swcorr/window.hpp"

namespace swcorr {

/// Classical Pearson coefficient with explicit mean subtraction.
/// Returns nullopt when either sample is constant (the coefficient is undefined).
inline std::optional<double> pearson_classical(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ParameterError("pearson_classical: length mismatch");
  if (x.size() < 2) throw ParameterError("pearson_classical: need at least two samples");
  const auto n = static_cast<double>(x.size());
  double mean_x = 0.0, mean_y = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mean_x += x[i];
    mean_y += y[i];
  }
  mean_x /= n;
  mean_y /= n;
  double cov = 0.0, ssx = 0.0, ssy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mean_x;
    const double dy = y[i] - mean_y;
    cov += dx * dy;
    ssx += dx * dx;
    ssy += dy * dy;
  }
  if (ssx == 0.0 || ssy == 0.0) return std::nullopt;
  return cov / std::sqrt(ssx * ssy);
}

namespace detail {

// Flat offsets of every window sample relative to the window's center.
inline std::vector<std::ptrdiff_t> window_offsets(const Shape& shape, const WindowSpec& w) {
  const auto strides = row_major_strides(shape);
  std::vector<std::ptrdiff_t> offsets{0};
  for (std::size_t d = 0; d < shape.size(); ++d) {
    const auto r = static_cast<std::ptrdiff_t>(w.radius(d));
    const auto stride = static_cast<std::ptrdiff_t>(strides[d]);
    std::vector<std::ptrdiff_t> grown;
    grown.reserve(offsets.size() * w.length(d));
    for (std::ptrdiff_t base : offsets)
      for (std::ptrdiff_t t = -r; t <= r; ++t) grown.push_back(base + t * stride);
    offsets = std::move(grown);
  }
  return offsets;
}

inline bool all_equal(std::span<const double> v) {
  return std::adjacent_find(v.begin(), v.end(), std::not_equal_to<>{}) == v.end();
}

// Evaluates output positions [range.begin, range.end) with the classical
// formula, one window at a time.
template <typename T>
void classical_range(const Grid<T>& x, const Grid<T>& y, const WindowSpec& w,
                     const MissingPolicy& policy, IndexRange range, Grid<double>& out) {
  const Shape& shape = x.shape();
  const auto offsets = window_offsets(shape, w);
  const auto strides = row_major_strides(shape);
  std::vector<double> wx(offsets.size()), wy(offsets.size());
  std::vector<std::size_t> idx(shape.size());
  std::size_t rem = range.begin;
  for (std::size_t d = 0; d < shape.size(); ++d) {
    idx[d] = rem / strides[d];
    rem %= strides[d];
  }
  for (std::size_t flat = range.begin; flat < range.end; ++flat) {
    double value = policy.fill_value;
    if (w.fits_at(shape, idx)) {
      bool missing = false;
      for (std::size_t s = 0; s < offsets.size(); ++s) {
        const auto at = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(flat) + offsets[s]);
        wx[s] = static_cast<double>(x[at]);
        wy[s] = static_cast<double>(y[at]);
        if (policy.is_missing(wx[s]) || policy.is_missing(wy[s])) missing = true;
      }
      if (!missing && !all_equal(wx) && !all_equal(wy) && wx.size() >= 2) {
        if (auto c = pearson_classical(wx, wy)) value = *c;
      }
    }
    out[flat] = value;
    for (std::size_t d = shape.size(); d-- > 0;) {
      if (++idx[d] < shape[d]) break;
      idx[d] = 0;
    }
  }
}

}  // namespace detail

/// Reference sliding-window correlation: every window is drawn into a vector
/// and passed to pearson_classical. Border, missing-contaminated and constant
/// windows get policy.fill_value. Single-threaded, double accumulation.
template <typename T>
Grid<double> naive_correlate_map(const Grid<T>& x, const Grid<T>& y, const WindowSpec& w,
                                 const MissingPolicy& policy = {}) {
  require_same_shape(x.shape(), y.shape());
  w.require_fits(x.shape());
  Grid<double> out(x.shape());
  detail::classical_range(x, y, w, policy, {0, x.size()}, out);
  return out;
}

}  // namespace swcorr
