#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "swcorr/grid.hpp"

namespace swcorr::synthetic {

// mt19937_64 is fully specified by the standard; the conversion to [0, 1)
// is done here so generated grids are identical across standard libraries.
class Uniform {
 public:
  explicit Uniform(std::uint64_t seed) : engine_(seed) {}
  double operator()() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double operator()(double lo, double hi) { return lo + (hi - lo) * (*this)(); }

 private:
  std::mt19937_64 engine_;
};

inline Grid<double> random(const Shape& shape, std::uint64_t seed) {
  Grid<double> g(shape);
  Uniform u(seed);
  for (auto& v : g.values()) v = u();
  return g;
}

// Integer-valued samples in [0, limit); window sums of these are exact in double.
inline Grid<double> random_integers(const Shape& shape, std::uint64_t seed, int limit = 100) {
  Grid<double> g(shape);
  Uniform u(seed);
  for (auto& v : g.values()) v = std::floor(u() * limit);
  return g;
}

// g[i][j] = i*B + j: each element holds its flat row-major index.
inline Grid<double> ramp(const Shape& shape) {
  Grid<double> g(shape);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = static_cast<double>(i);
  return g;
}

// y = -x + noise, so window correlations sit close to -1.
inline std::pair<Grid<double>, Grid<double>> anticorrelated(const Shape& shape, std::uint64_t seed,
                                                            double noise = 0.1) {
  Grid<double> x = random(shape, seed);
  Grid<double> y(shape);
  Uniform u(seed ^ 0x9e3779b97f4a7c15ULL);
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = -x[i] + u(-noise, noise);
  return {std::move(x), std::move(y)};
}

// Gaussian "cloud" blobs over a noisy background: the first grid brightens
// under clouds, the second cools, so cloudy windows anticorrelate.
inline std::pair<Grid<double>, Grid<double>> clouds(const Shape& shape, std::uint64_t seed) {
  Uniform u(seed);
  const std::size_t total = element_count(shape);
  const std::size_t blobs = std::max<std::size_t>(1, total / 1024);
  std::vector<std::vector<double>> centers(blobs, std::vector<double>(shape.size()));
  std::vector<double> radii(blobs);
  double smallest = static_cast<double>(shape[0]);
  for (std::size_t e : shape) smallest = std::min(smallest, static_cast<double>(e));
  for (std::size_t b = 0; b < blobs; ++b) {
    for (std::size_t d = 0; d < shape.size(); ++d) centers[b][d] = u() * static_cast<double>(shape[d]);
    radii[b] = std::max(1.5, smallest * (0.05 + 0.1 * u()));
  }
  Grid<double> cover(shape);
  const auto strides = row_major_strides(shape);
  for (std::size_t i = 0; i < total; ++i) {
    double c = 0.0;
    for (std::size_t b = 0; b < blobs; ++b) {
      double dist2 = 0.0;
      std::size_t rem = i;
      for (std::size_t d = 0; d < shape.size(); ++d) {
        const double delta = static_cast<double>(rem / strides[d]) - centers[b][d];
        rem %= strides[d];
        dist2 += delta * delta;
      }
      c += std::exp(-dist2 / (2.0 * radii[b] * radii[b]));
    }
    cover[i] = std::min(1.0, c);
  }
  Grid<double> visible(shape), infrared(shape);
  for (std::size_t i = 0; i < total; ++i) {
    visible[i] = 0.1 + cover[i] + 0.05 * u();
    infrared[i] = 1.0 - cover[i] + 0.05 * u();
  }
  return {std::move(visible), std::move(infrared)};
}

// Replaces a fraction of the samples with `sentinel`.
inline void plant_missing(Grid<double>& g, double fraction, std::uint64_t seed, double sentinel = -999.0) {
  if (fraction <= 0.0) return;
  Uniform u(seed ^ 0xc2b2ae3d27d4eb4fULL);
  for (auto& v : g.values())
    if (u() < fraction) v = sentinel;
}

}  // namespace swcorr::synthetic
