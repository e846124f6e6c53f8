#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <type_traits>
#include <vector>

#include "swcorr/grid.hpp"
#include "swcorr/lanes.hpp"
#include "swcorr/parallel.hpp"
#include "swcorr/window.hpp"

namespace swcorr {

namespace detail {

// One axis of the constant-window test. out[p] = in[p] when the length-k
// window centered at p holds a single repeated value, NaN otherwise. NaN never
// compares equal, so windows that were not constant along an earlier axis stay
// marked. A window is constant iff the run of equal values ending at its last
// sample started at or before its first sample.
template <typename T>
void constant_lane_run(const T* in, T* out, std::size_t extent, std::size_t stride, std::size_t width,
                       std::size_t k, std::vector<std::size_t>& run_start) {
  constexpr T kNotConstant = std::numeric_limits<T>::quiet_NaN();
  const std::size_t r = k / 2;
  run_start.assign(width, 0);
  for (std::size_t q = 0; q < extent; ++q) {
    const T* row = in + q * stride;
    if (q > 0) {
      const T* prev = row - stride;
      for (std::size_t j = 0; j < width; ++j)
        if (!(row[j] == prev[j])) run_start[j] = q;
    }
    if (q + 1 >= k) {
      T* dst = out + (q - r) * stride;
      for (std::size_t j = 0; j < width; ++j) dst[j] = run_start[j] + k - 1 <= q ? row[j] : kNotConstant;
    }
  }
}

template <typename T>
void constant_axis_into(const T* in, T* out, const Shape& shape, std::size_t axis, std::size_t k,
                        std::size_t threads) {
  const LaneGeometry geo(shape, axis);
  run_chunks(plan_parallel(shape, Stage::axis_pass(axis), resolve_threads(threads)), [&](IndexRange range) {
    std::vector<std::size_t> run_start;
    for_each_lane_run(geo, range, [&](std::size_t offset, std::size_t width) {
      constant_lane_run(in + offset, out + offset, geo.extent, geo.inner, width, k, run_start);
    });
  });
}

}  // namespace detail

/// Window value where every sample of the window centered at p is equal, NaN
/// where it is not. Only positions where the window fits are meaningful.
/// Cost per axis is one comparison per element whatever the window length.
template <typename T>
Grid<T> constant_window_values(const Grid<T>& g, const WindowSpec& w, std::size_t threads = 1) {
  static_assert(std::is_floating_point_v<T>);
  w.require_fits(g.shape());
  Grid<T> current(g.shape());
  detail::constant_axis_into(g.data(), current.data(), g.shape(), 0, w.length(0), threads);
  Grid<T> next(g.shape());
  for (std::size_t d = 1; d < g.ndim(); ++d) {
    detail::constant_axis_into(current.data(), next.data(), g.shape(), d, w.length(d), threads);
    std::swap(current, next);
  }
  return current;
}

/// 1 where the window centered there holds one repeated value.
template <typename T>
Grid<std::uint8_t> constant_window_mask(const Grid<T>& g, const WindowSpec& w, std::size_t threads = 1) {
  const Grid<T> values = constant_window_values(g, w, threads);
  Grid<std::uint8_t> out(g.shape());
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = std::isnan(values[i]) ? 0 : 1;
  return out;
}

}  // namespace swcorr
