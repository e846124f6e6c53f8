#pragma once

#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "swcorr/errors.hpp"
#include "swcorr/grid.hpp"
#include "swcorr/lanes.hpp"
#include "swcorr/parallel.hpp"
#include "swcorr/window.hpp"

namespace swcorr {

// Window sums of floating grids accumulate in double; integer grids (masks)
// accumulate exactly in 64-bit integers.
template <typename T>
using sum_t = std::conditional_t<std::is_integral_v<T>, std::int64_t, double>;

/// One axis of a separable window sum.
struct AxisSum {
  std::size_t axis = 0;
  std::size_t length = 1;

  void validate(const Shape& shape) const {
    if (axis >= shape.size())
      throw ParameterError("axis " + std::to_string(axis) + " out of range for rank " +
                           std::to_string(shape.size()));
    if (length % 2 == 0) throw ParameterError("window lengths must be odd");
    if (length > shape[axis])
      throw ParameterError("window length " + std::to_string(length) + " exceeds extent " +
                           std::to_string(shape[axis]));
  }
};

/// Centered sliding sum of odd length k over `row`.
///
/// Only positions p with k/2 <= p < size-k/2 are defined; edge positions are
/// left at zero and must not be read. Each step adds the entering element and
/// subtracts the leaving one, so at most 2*size elements are read whatever k is.
/// When `reads` is non-null it is incremented once per element read.
template <typename T>
std::vector<sum_t<T>> moving_sum_1d(std::span<const T> row, std::size_t k,
                                    std::size_t* reads = nullptr) {
  if (k % 2 == 0) throw ParameterError("window lengths must be odd");
  if (k > row.size()) throw ParameterError("window length exceeds row length");
  using Acc = sum_t<T>;
  std::vector<Acc> out(row.size(), Acc{});
  const std::size_t r = k / 2;
  Acc acc{};
  for (std::size_t t = 0; t < k; ++t) acc += static_cast<Acc>(row[t]);
  out[r] = acc;
  for (std::size_t p = r + 1; p + r < row.size(); ++p) {
    acc = acc + static_cast<Acc>(row[p + r]) - static_cast<Acc>(row[p - r - 1]);
    out[p] = acc;
  }
  if (reads) *reads += k + 2 * (row.size() - k);
  return out;
}

namespace detail {

// Sliding sum over `width` adjacent lanes at once; lane j starts at in[j] and
// steps by `stride`. The per-lane arithmetic is exactly that of moving_sum_1d.
template <typename In, typename Acc>
void sum_lane_run(const In* in, Acc* out, std::size_t extent, std::size_t stride,
                  std::size_t width, std::size_t k, std::vector<Acc>& acc) {
  const std::size_t r = k / 2;
  acc.assign(width, Acc{});
  for (std::size_t t = 0; t < k; ++t) {
    const In* src = in + t * stride;
    for (std::size_t j = 0; j < width; ++j) acc[j] += static_cast<Acc>(src[j]);
  }
  Acc* dst = out + r * stride;
  for (std::size_t j = 0; j < width; ++j) dst[j] = acc[j];
  for (std::size_t p = r + 1; p + r < extent; ++p) {
    const In* enter = in + (p + r) * stride;
    const In* leave = in + (p - r - 1) * stride;
    dst = out + p * stride;
    for (std::size_t j = 0; j < width; ++j) {
      acc[j] = acc[j] + static_cast<Acc>(enter[j]) - static_cast<Acc>(leave[j]);
      dst[j] = acc[j];
    }
  }
}

template <typename In, typename Acc>
void sum_axis_into(const In* in, Acc* out, const Shape& shape, AxisSum s, std::size_t threads) {
  const LaneGeometry geo(shape, s.axis);
  const auto chunks = plan_parallel(shape, Stage::axis_pass(s.axis), resolve_threads(threads));
  run_chunks(chunks, [&](IndexRange range) {
    std::vector<Acc> acc;
    for_each_lane_run(geo, range, [&](std::size_t offset, std::size_t width) {
      sum_lane_run(in + offset, out + offset, geo.extent, geo.inner, width, s.length, acc);
    });
  });
}

}  // namespace detail

/// Applies the centered sliding sum to every lane of `g` along `s.axis`.
template <typename T>
Grid<sum_t<T>> moving_sum_axis(const Grid<T>& g, AxisSum s, std::size_t threads = 1) {
  s.validate(g.shape());
  Grid<sum_t<T>> out(g.shape());
  detail::sum_axis_into(g.data(), out.data(), g.shape(), s, threads);
  return out;
}

/// Box sum over the window centered at every position, computed as one
/// sliding-sum pass per axis in `axis_order`. Values are defined only where
/// the window fits inside the grid.
template <typename T>
Grid<sum_t<T>> separable_window_sum(const Grid<T>& g, const WindowSpec& w,
                                    std::span<const std::size_t> axis_order,
                                    std::size_t threads = 1) {
  using Acc = sum_t<T>;
  if (w.ndim() != g.ndim()) throw ParameterError("window rank does not match grid rank");
  if (axis_order.size() != g.ndim()) throw ParameterError("axis order must list every axis");
  std::vector<bool> seen(g.ndim(), false);
  for (std::size_t a : axis_order) {
    if (a >= g.ndim() || seen[a]) throw ParameterError("axis order must be a permutation");
    seen[a] = true;
  }
  for (std::size_t d = 0; d < g.ndim(); ++d) AxisSum{d, w.length(d)}.validate(g.shape());

  Grid<Acc> current(g.shape());
  detail::sum_axis_into(g.data(), current.data(), g.shape(), {axis_order[0], w.length(axis_order[0])},
                        threads);
  Grid<Acc> next(g.shape());
  for (std::size_t i = 1; i < axis_order.size(); ++i) {
    const std::size_t axis = axis_order[i];
    detail::sum_axis_into(current.data(), next.data(), g.shape(), {axis, w.length(axis)}, threads);
    std::swap(current, next);
  }
  return current;
}

template <typename T>
Grid<sum_t<T>> separable_window_sum(const Grid<T>& g, const WindowSpec& w, std::size_t threads = 1) {
  std::vector<std::size_t> order(g.ndim());
  std::iota(order.begin(), order.end(), std::size_t{0});
  return separable_window_sum(g, w, std::span<const std::size_t>(order), threads);
}

/// Inclusive prefix sum along `axis`.
template <typename T>
Grid<sum_t<T>> cumulative_sum_axis(const Grid<T>& g, std::size_t axis) {
  using Acc = sum_t<T>;
  if (axis >= g.ndim()) throw ParameterError("axis out of range");
  Grid<Acc> out(g.shape());
  const detail::LaneGeometry geo(g.shape(), axis);
  for (std::size_t o = 0; o < geo.outer; ++o) {
    const std::size_t base = o * geo.extent * geo.inner;
    for (std::size_t i = 0; i < geo.inner; ++i) out[base + i] = static_cast<Acc>(g[base + i]);
    for (std::size_t p = 1; p < geo.extent; ++p) {
      const std::size_t row = base + p * geo.inner;
      for (std::size_t i = 0; i < geo.inner; ++i)
        out[row + i] = out[row - geo.inner + i] + static_cast<Acc>(g[row + i]);
    }
  }
  return out;
}

/// Box sums from an n-D prefix-sum table by 2^n-corner inclusion-exclusion.
/// Same contract as separable_window_sum; non-interior positions are zero.
template <typename T>
Grid<sum_t<T>> window_sum_via_cumsum(const Grid<T>& g, const WindowSpec& w, std::size_t threads = 1) {
  using Acc = sum_t<T>;
  const std::size_t ndim = g.ndim();
  if (w.ndim() != ndim) throw ParameterError("window rank does not match grid rank");
  for (std::size_t d = 0; d < ndim; ++d) AxisSum{d, w.length(d)}.validate(g.shape());

  // Prefix table padded with a leading zero plane on every axis.
  Shape padded_shape = g.shape();
  for (auto& e : padded_shape) ++e;
  Grid<Acc> table(padded_shape);
  const auto src_strides = row_major_strides(g.shape());
  const auto pad_strides = row_major_strides(padded_shape);
  {
    std::vector<std::size_t> idx(ndim, 0);
    for (std::size_t flat = 0; flat < g.size(); ++flat) {
      std::size_t dst = 0;
      for (std::size_t d = 0; d < ndim; ++d) dst += (idx[d] + 1) * pad_strides[d];
      table[dst] = static_cast<Acc>(g[flat]);
      for (std::size_t d = ndim; d-- > 0;) {
        if (++idx[d] < g.shape()[d]) break;
        idx[d] = 0;
      }
    }
  }
  for (std::size_t d = 0; d < ndim; ++d) table = cumulative_sum_axis(table, d);

  // Corner c picks p+r+1 (bit clear) or p-r (bit set) on each axis, in padded
  // coordinates; corners with an odd number of low picks are subtracted.
  const std::size_t corners = std::size_t{1} << ndim;
  std::vector<std::ptrdiff_t> corner_offset(corners, 0);
  std::vector<bool> corner_negative(corners, false);
  for (std::size_t c = 0; c < corners; ++c) {
    std::ptrdiff_t off = 0;
    int lows = 0;
    for (std::size_t d = 0; d < ndim; ++d) {
      const auto r = static_cast<std::ptrdiff_t>(w.radius(d));
      const auto stride = static_cast<std::ptrdiff_t>(pad_strides[d]);
      if (c & (std::size_t{1} << d)) {
        off += -r * stride;
        ++lows;
      } else {
        off += (r + 1) * stride;
      }
    }
    corner_offset[c] = off;
    corner_negative[c] = (lows % 2) == 1;
  }

  Grid<Acc> out(g.shape());
  const auto chunks = plan_parallel(g.shape(), Stage::elementwise(), resolve_threads(threads));
  run_chunks(chunks, [&](IndexRange range) {
    std::vector<std::size_t> idx(ndim);
    std::size_t rem = range.begin;
    for (std::size_t d = 0; d < ndim; ++d) {
      idx[d] = rem / src_strides[d];
      rem %= src_strides[d];
    }
    for (std::size_t flat = range.begin; flat < range.end; ++flat) {
      if (w.fits_at(g.shape(), idx)) {
        std::size_t base = 0;
        for (std::size_t d = 0; d < ndim; ++d) base += idx[d] * pad_strides[d];
        Acc sum{};
        for (std::size_t c = 0; c < corners; ++c) {
          const Acc v = table[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(base) + corner_offset[c])];
          sum = corner_negative[c] ? sum - v : sum + v;
        }
        out[flat] = sum;
      }
      for (std::size_t d = ndim; d-- > 0;) {
        if (++idx[d] < g.shape()[d]) break;
        idx[d] = 0;
      }
    }
  });
  return out;
}

}  // namespace swcorr
