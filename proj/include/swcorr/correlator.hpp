#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "swcorr/errors.hpp"
#include "swcorr/grid.hpp"
#include "swcorr/moving_sum.hpp"
#include "swcorr/naive.hpp"
#include "swcorr/parallel.hpp"
#include "swcorr/window.hpp"
#include "swcorr/constant_window.hpp"

namespace swcorr {

enum class Backend { naive, separable, cumsum };

inline std::string_view to_string(Backend b) {
  switch (b) {
    case Backend::naive: return "naive";
    case Backend::separable: return "separable";
    case Backend::cumsum: return "cumsum";
  }
  return "?";
}

inline Backend parse_backend(std::string_view name) {
  if (name == "naive") return Backend::naive;
  if (name == "separable") return Backend::separable;
  if (name == "cumsum") return Backend::cumsum;
  throw ParameterError("unknown backend '" + std::string(name) + "'");
}

struct CorrelatorConfig {
  Backend backend = Backend::separable;
  std::size_t threads = 0;  // 0 = hardware concurrency
  // A window is degenerate when n*Sxx - Sx^2 <= constant_epsilon * max(1, Sx^2, Sy^2)
  // (likewise for y). Exactly constant windows are always degenerate.
  double constant_epsilon = 0.0;

  void validate() const {
    if (!(constant_epsilon >= 0.0)) throw ParameterError("constant_epsilon must be >= 0");
  }
};

/// Correlation coefficients in [-1, 1], with fill_value wherever the
/// coefficient is undefined (border, missing data, constant window).
struct CorrelationMap {
  Grid<double> grid;
  double fill_value = -2.0;

  bool is_fill(std::size_t flat) const { return grid[flat] == fill_value; }
};

/// Pearson coefficient from window sums, in the sum-of-products form
///   (n*Sxy - Sx*Sy) / (sqrt(n*Sxx - Sx^2) * sqrt(n*Syy - Sy^2)).
/// nullopt marks a degenerate (zero-variance) window. Result clamped to [-1, 1].
inline std::optional<double> combine_sums(double sx, double sy, double sxy, double sxx, double syy,
                                          std::size_t n, double epsilon = 0.0) {
  if (n < 2) return std::nullopt;
  const auto nd = static_cast<double>(n);
  const double vx = nd * sxx - sx * sx;
  const double vy = nd * syy - sy * sy;
  const double scale = std::max({1.0, sx * sx, sy * sy});
  if (vx <= epsilon * scale || vy <= epsilon * scale) return std::nullopt;
  const double c = (nd * sxy - sx * sy) / (std::sqrt(vx) * std::sqrt(vy));
  return std::clamp(c, -1.0, 1.0);
}

namespace detail {

// Walks flat positions of `range` keeping the multi-index in step.
template <typename Fn>
void for_each_position(const Shape& shape, IndexRange range, Fn&& fn) {
  const auto strides = row_major_strides(shape);
  std::vector<std::size_t> idx(shape.size());
  std::size_t rem = range.begin;
  for (std::size_t d = 0; d < shape.size(); ++d) {
    idx[d] = rem / strides[d];
    rem %= strides[d];
  }
  for (std::size_t flat = range.begin; flat < range.end; ++flat) {
    fn(flat, idx);
    for (std::size_t d = shape.size(); d-- > 0;) {
      if (++idx[d] < shape[d]) break;
      idx[d] = 0;
    }
  }
}

template <typename T>
void require_compatible(const Grid<T>& x, const Grid<T>& y, const WindowSpec& w) {
  require_same_shape(x.shape(), y.shape());
  w.require_fits(x.shape());
}

template <typename In>
Grid<sum_t<In>> window_sum(const Grid<In>& g, const WindowSpec& w, Backend backend,
                           std::size_t threads) {
  return backend == Backend::cumsum ? window_sum_via_cumsum(g, w, threads)
                                    : separable_window_sum(g, w, threads);
}

}  // namespace detail

/// 1 where the window leaves the grid or holds a missing sample in x or y.
/// The missing count per window is itself a separable window sum, so the cost
/// does not depend on the window size.
template <typename T>
Grid<std::uint8_t> invalidity_mask(const Grid<T>& x, const Grid<T>& y, const WindowSpec& w,
                                   const MissingPolicy& policy = {}, std::size_t threads = 1) {
  detail::require_compatible(x, y, w);
  Grid<std::uint8_t> either(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i)
    either[i] = policy.is_missing(static_cast<double>(x[i])) ||
                policy.is_missing(static_cast<double>(y[i]));
  const auto counts = separable_window_sum(either, w, threads);
  Grid<std::uint8_t> out(x.shape());
  detail::for_each_position(x.shape(), {0, x.size()}, [&](std::size_t flat, const auto& idx) {
    out[flat] = (!w.fits_at(x.shape(), idx) || counts[flat] > 0) ? 1 : 0;
  });
  return out;
}

namespace detail {

// Window sums of x, y, xy, x^2, y^2 and of the missing indicator.
enum SumIndex : std::size_t { kSx, kSy, kSxy, kSxx, kSyy, kGaps, kSumCount };
using SumGrids = std::array<Grid<double>, kSumCount>;

// Element-wise terms of one sample pair; missing pairs contribute zeros.
struct Terms {
  std::array<double, kSumCount> v;

  template <typename T>
  static Terms of(T a, T b, const MissingPolicy& policy) {
    const auto u = static_cast<double>(a);
    const auto w = static_cast<double>(b);
    if (policy.is_missing(u) || policy.is_missing(w)) return {{0.0, 0.0, 0.0, 0.0, 0.0, 1.0}};
    return {{u, w, u * w, u * u, w * w, 0.0}};
  }
};

// Sliding sums along the last (contiguous) axis with the products formed on
// the fly. Per term the arithmetic matches moving_sum_1d over the product lane.
template <typename T>
void row_pass_sums(const Grid<T>& x, const Grid<T>& y, const WindowSpec& w, const MissingPolicy& policy,
                   std::size_t threads, SumGrids& out) {
  const Shape& shape = x.shape();
  const std::size_t axis = shape.size() - 1;
  const std::size_t extent = shape[axis];
  const std::size_t k = w.length(axis);
  const std::size_t r = k / 2;
  run_chunks(plan_parallel(shape, Stage::axis_pass(axis), threads), [&](IndexRange lanes) {
    for (std::size_t lane = lanes.begin; lane < lanes.end; ++lane) {
      const std::size_t base = lane * extent;
      const T* xs = x.data() + base;
      const T* ys = y.data() + base;
      std::array<double, kSumCount> acc{};
      for (std::size_t t = 0; t < k; ++t) {
        const Terms e = Terms::of(xs[t], ys[t], policy);
        for (std::size_t s = 0; s < kSumCount; ++s) acc[s] += e.v[s];
      }
      for (std::size_t s = 0; s < kSumCount; ++s) out[s][base + r] = acc[s];
      for (std::size_t p = r + 1; p + r < extent; ++p) {
        const Terms enter = Terms::of(xs[p + r], ys[p + r], policy);
        const Terms leave = Terms::of(xs[p - r - 1], ys[p - r - 1], policy);
        for (std::size_t s = 0; s < kSumCount; ++s) {
          acc[s] = acc[s] + enter.v[s] - leave.v[s];
          out[s][base + p] = acc[s];
        }
      }
    }
  });
}

// Per-position decision shared by every backend path.
template <typename T>
struct Combiner {
  const Grid<T>& flat_x;  // NaN where the x-window is not constant
  const Grid<T>& flat_y;
  std::size_t n;
  double epsilon;
  double fill;

  double operator()(std::size_t i, double sx, double sy, double sxy, double sxx, double syy,
                    double gaps) const {
    if (gaps != 0.0 || !std::isnan(flat_x[i]) || !std::isnan(flat_y[i])) return fill;
    const auto c = combine_sums(sx, sy, sxy, sxx, syy, n, epsilon);
    return c ? *c : fill;
  }
};

// True when the position's index along axes [first, ndim) is interior, for
// each position of a lane block that spans those axes.
inline std::vector<std::uint8_t> interior_flags(const Shape& shape, const WindowSpec& w, std::size_t first) {
  Shape sub(shape.begin() + static_cast<std::ptrdiff_t>(first), shape.end());
  std::vector<std::uint8_t> flags(element_count(sub), 1);
  std::vector<std::size_t> idx(sub.size(), 0);
  for (std::size_t f = 0; f < flags.size(); ++f) {
    for (std::size_t d = 0; d < sub.size(); ++d) {
      const std::size_t rad = w.radius(first + d);
      if (idx[d] < rad || idx[d] + rad >= sub[d]) flags[f] = 0;
    }
    for (std::size_t d = sub.size(); d-- > 0;) {
      if (++idx[d] < sub[d]) break;
      idx[d] = 0;
    }
  }
  return flags;
}

// Final sliding-sum pass along axis 0 fused with the per-position combine, so
// the finished window sums are never stored.
template <typename T>
void column_pass_combine(const SumGrids& partial, const WindowSpec& w, const Combiner<T>& combine,
                         std::size_t threads, Grid<double>& out) {
  const Shape& shape = out.shape();
  const LaneGeometry geo(shape, 0);
  const std::size_t k = w.length(0);
  const std::size_t r = k / 2;
  const auto inner_ok = interior_flags(shape, w, 1);
  run_chunks(plan_parallel(shape, Stage::axis_pass(0), threads), [&](IndexRange range) {
    std::array<std::vector<double>, kSumCount> acc;
    for_each_lane_run(geo, range, [&](std::size_t offset, std::size_t width) {
      for (auto& a : acc) a.assign(width, 0.0);
      for (std::size_t s = 0; s < kSumCount; ++s) {
        const double* in = partial[s].data() + offset;
        for (std::size_t t = 0; t < k; ++t)
          for (std::size_t j = 0; j < width; ++j) acc[s][j] += in[t * geo.inner + j];
      }
      for (std::size_t p = r; p + r < geo.extent; ++p) {
        if (p > r) {
          for (std::size_t s = 0; s < kSumCount; ++s) {
            const double* enter = partial[s].data() + offset + (p + r) * geo.inner;
            const double* leave = partial[s].data() + offset + (p - r - 1) * geo.inner;
            for (std::size_t j = 0; j < width; ++j) acc[s][j] = acc[s][j] + enter[j] - leave[j];
          }
        }
        const std::size_t row = offset + p * geo.inner;
        for (std::size_t j = 0; j < width; ++j) {
          if (!inner_ok[offset + j]) continue;
          out[row + j] = combine(row + j, acc[kSx][j], acc[kSy][j], acc[kSxy][j], acc[kSxx][j], acc[kSyy][j],
                                 acc[kGaps][j]);
        }
      }
    });
  });
}

// Combine stage over already-finished sums: visits only interior positions.
template <typename T>
void combine_interior(const SumGrids& sums, const WindowSpec& w, const Combiner<T>& combine,
                      std::size_t threads, Grid<double>& out) {
  const Shape& shape = out.shape();
  const std::size_t last = shape.size() - 1;
  const std::size_t extent = shape[last];
  const std::size_t r = w.radius(last);
  const auto interior = interior_flags(shape, w, 0);
  run_chunks(plan_parallel(shape, Stage::axis_pass(last), threads), [&](IndexRange range) {
    for (std::size_t lane = range.begin; lane < range.end; ++lane) {
      const std::size_t base = lane * extent;
      if (!interior[base + r]) continue;
      for (std::size_t j = r; j + r < extent; ++j) {
        const std::size_t i = base + j;
        out[i] = combine(i, sums[kSx][i], sums[kSy][i], sums[kSxy][i], sums[kSxx][i], sums[kSyy][i],
                         sums[kGaps][i]);
      }
    }
  });
}

// Output rows per band of the 2-D kernel. Fixed, so results do not depend on
// how bands are spread over threads.
inline constexpr std::size_t kBandRows = 64;

// Fused 2-D kernel. Each band of output rows keeps a ring of k0+1 row results
// (the six row sums and the row-constant values of x and y); every new row
// enters the column accumulators and the row k0 above it leaves. Bands are
// distributed over threads.
template <typename T>
void correlate_2d_banded(const Grid<T>& x, const Grid<T>& y, const WindowSpec& w, const MissingPolicy& policy,
                         double epsilon, std::size_t threads, Grid<double>& out) {
  constexpr T kNotConstant = std::numeric_limits<T>::quiet_NaN();
  const std::size_t rows = x.extent(0), cols = x.extent(1);
  const std::size_t k0 = w.length(0), k1 = w.length(1);
  const std::size_t r0 = k0 / 2, r1 = k1 / 2;
  const std::size_t first_row = r0, end_row = rows - r0;
  const std::size_t j0 = r1, j1 = cols - r1;
  const std::size_t slots = k0 + 1;
  const std::size_t n = w.sample_count();
  const std::size_t bands = (end_row - first_row + kBandRows - 1) / kBandRows;

  run_chunks(split_range(bands, threads), [&](IndexRange band_range) {
    std::vector<double> ring_sums(slots * kSumCount * cols, 0.0);
    std::vector<T> ring_flat(slots * 2 * cols, kNotConstant);
    std::array<std::vector<double>, kSumCount> acc;
    std::vector<std::size_t> start_x(cols), start_y(cols);
    auto sums_at = [&](std::size_t row, std::size_t s) { return ring_sums.data() + ((row % slots) * kSumCount + s) * cols; };
    auto flat_at = [&](std::size_t row, std::size_t which) { return ring_flat.data() + ((row % slots) * 2 + which) * cols; };

    std::array<std::vector<double>, kSumCount> terms;
    for (auto& t : terms) t.resize(cols);
    auto fill_row = [&](std::size_t q) {
      const T* xs = x.data() + q * cols;
      const T* ys = y.data() + q * cols;
      for (std::size_t j = 0; j < cols; ++j) {
        const auto u = static_cast<double>(xs[j]);
        const auto v = static_cast<double>(ys[j]);
        const bool gap = policy.is_missing(u) || policy.is_missing(v);
        const double uu = gap ? 0.0 : u;
        const double vv = gap ? 0.0 : v;
        terms[kSx][j] = uu;
        terms[kSy][j] = vv;
        terms[kSxy][j] = uu * vv;
        terms[kSxx][j] = uu * uu;
        terms[kSyy][j] = vv * vv;
        terms[kGaps][j] = gap ? 1.0 : 0.0;
      }
      for (std::size_t s = 0; s < kSumCount; ++s) {
        const double* t = terms[s].data();
        double* dst = sums_at(q, s);
        double a = 0.0;
        for (std::size_t i = 0; i < k1; ++i) a += t[i];
        dst[r1] = a;
        for (std::size_t j = r1 + 1; j < j1; ++j) {
          a = a + t[j + r1] - t[j - r1 - 1];
          dst[j] = a;
        }
      }
      const T* src[2] = {xs, ys};
      for (std::size_t which = 0; which < 2; ++which) {
        T* flat = flat_at(q, which);
        const T* v = src[which];
        std::size_t run = 0;
        for (std::size_t j = 0; j < cols; ++j) {
          if (j > 0 && !(v[j] == v[j - 1])) run = j;
          if (j + 1 >= k1) flat[j - r1] = run + k1 - 1 <= j ? v[j] : kNotConstant;
        }
      }
    };
    // Column runs of equal row-constant values; row q has just entered.
    auto track_runs = [&](std::size_t q, bool first) {
      const T* fx = flat_at(q, 0);
      const T* fy = flat_at(q, 1);
      const T* px = first ? nullptr : flat_at(q - 1, 0);
      const T* py = first ? nullptr : flat_at(q - 1, 1);
      for (std::size_t j = j0; j < j1; ++j) {
        if (first || !(fx[j] == px[j])) start_x[j] = q;
        if (first || !(fy[j] == py[j])) start_y[j] = q;
      }
    };
    auto emit_row = [&](std::size_t p) {
      const std::size_t q = p + r0;
      const T* fx = flat_at(q, 0);
      const T* fy = flat_at(q, 1);
      double* dst = out.data() + p * cols;
      for (std::size_t j = j0; j < j1; ++j) {
        const bool const_x = start_x[j] + r0 <= p && !std::isnan(fx[j]);
        const bool const_y = start_y[j] + r0 <= p && !std::isnan(fy[j]);
        if (acc[kGaps][j] != 0.0 || const_x || const_y) continue;
        if (auto c = combine_sums(acc[kSx][j], acc[kSy][j], acc[kSxy][j], acc[kSxx][j], acc[kSyy][j], n, epsilon))
          dst[j] = *c;
      }
    };

    for (std::size_t band = band_range.begin; band < band_range.end; ++band) {
      const std::size_t a = first_row + band * kBandRows;
      const std::size_t b = std::min(end_row, a + kBandRows);
      for (auto& v : acc) v.assign(cols, 0.0);
      for (std::size_t q = a - r0; q <= a + r0; ++q) {
        fill_row(q);
        track_runs(q, q == a - r0);
        for (std::size_t s = 0; s < kSumCount; ++s) {
          const double* row = sums_at(q, s);
          for (std::size_t j = j0; j < j1; ++j) acc[s][j] += row[j];
        }
      }
      emit_row(a);
      for (std::size_t p = a + 1; p < b; ++p) {
        const std::size_t q = p + r0;
        fill_row(q);
        track_runs(q, false);
        for (std::size_t s = 0; s < kSumCount; ++s) {
          const double* enter = sums_at(q, s);
          const double* leave = sums_at(p - r0 - 1, s);
          double* av = acc[s].data();
          for (std::size_t j = j0; j < j1; ++j) av[j] = av[j] + enter[j] - leave[j];
        }
        emit_row(p);
      }
    }
  });
}

}  // namespace detail

/// Sliding-window Pearson correlation map.
///
/// The separable and cumsum backends window-sum x, y, xy, x^2 and y^2 and
/// combine the five sums per position with combine_sums. Missing samples are
/// zeroed before summing and every window that touches one is filled
/// afterwards; exactly constant windows are detected separately and filled.
/// The output is bitwise independent of cfg.threads.
template <typename T>
CorrelationMap correlate(const Grid<T>& x, const Grid<T>& y, const WindowSpec& w,
                         const MissingPolicy& policy = {}, const CorrelatorConfig& cfg = {}) {
  detail::require_compatible(x, y, w);
  policy.validate();
  cfg.validate();
  const std::size_t threads = resolve_threads(cfg.threads);
  const Shape& shape = x.shape();

  if (cfg.backend == Backend::naive) {
    Grid<double> out(shape);
    run_chunks(plan_parallel(shape, Stage::elementwise(), threads), [&](IndexRange range) {
      detail::classical_range(x, y, w, policy, range, out);
    });
    return {std::move(out), policy.fill_value};
  }

  if (cfg.backend == Backend::separable && shape.size() == 2) {
    Grid<double> out(shape, policy.fill_value);
    detail::correlate_2d_banded(x, y, w, policy, cfg.constant_epsilon, threads, out);
    return {std::move(out), policy.fill_value};
  }

  const Grid<T> flat_x = constant_window_values(x, w, threads);
  const Grid<T> flat_y = constant_window_values(y, w, threads);
  const detail::Combiner<T> combine{flat_x, flat_y, w.sample_count(), cfg.constant_epsilon, policy.fill_value};
  Grid<double> out(shape, policy.fill_value);
  detail::SumGrids sums;
  for (auto& g : sums) g = Grid<double>(shape);

  if (cfg.backend == Backend::cumsum) {
    detail::SumGrids terms;
    for (auto& g : terms) g = Grid<double>(shape);
    run_chunks(plan_parallel(shape, Stage::elementwise(), threads), [&](IndexRange range) {
      for (std::size_t i = range.begin; i < range.end; ++i) {
        const auto e = detail::Terms::of(x[i], y[i], policy);
        for (std::size_t s = 0; s < detail::kSumCount; ++s) terms[s][i] = e.v[s];
      }
    });
    for (std::size_t s = 0; s < detail::kSumCount; ++s) sums[s] = window_sum_via_cumsum(terms[s], w, threads);
    detail::combine_interior(sums, w, combine, threads, out);
    return {std::move(out), policy.fill_value};
  }

  // Separable: last axis with on-the-fly products, then the middle axes, then
  // axis 0 fused with the combine.
  detail::row_pass_sums(x, y, w, policy, threads, sums);
  if (shape.size() == 1) {
    detail::combine_interior(sums, w, combine, threads, out);
    return {std::move(out), policy.fill_value};
  }
  Grid<double> scratch(shape);
  for (std::size_t axis = shape.size() - 1; axis-- > 1;) {
    for (auto& g : sums) {
      detail::sum_axis_into(g.data(), scratch.data(), shape, AxisSum{axis, w.length(axis)}, threads);
      std::swap(g, scratch);
    }
  }
  detail::column_pass_combine(sums, w, combine, threads, out);
  return {std::move(out), policy.fill_value};
}

}  // namespace swcorr
