#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "swcorr/errors.hpp"

namespace swcorr {

using Shape = std::vector<std::size_t>;

enum class ElementKind { f32, f64 };

template <typename T>
constexpr ElementKind element_kind_of() {
  static_assert(std::is_same_v<T, float> || std::is_same_v<T, double>,
                "grid files hold f32 or f64 only");
  return std::is_same_v<T, float> ? ElementKind::f32 : ElementKind::f64;
}

inline std::string shape_to_string(const Shape& shape) {
  std::string s;
  for (std::size_t d = 0; d < shape.size(); ++d) {
    if (d) s += 'x';
    s += std::to_string(shape[d]);
  }
  return s;
}

inline std::size_t element_count(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>{});
}

inline void validate_shape(const Shape& shape) {
  if (shape.empty()) throw ShapeError("grid shape must have at least one axis");
  if (std::find(shape.begin(), shape.end(), std::size_t{0}) != shape.end())
    throw ShapeError("grid extents must be >= 1, got " + shape_to_string(shape));
}

// Row-major element strides; the last axis is contiguous.
inline std::vector<std::size_t> row_major_strides(const Shape& shape) {
  std::vector<std::size_t> strides(shape.size(), 1);
  for (std::size_t d = shape.size(); d-- > 1;) strides[d - 1] = strides[d] * shape[d];
  return strides;
}

/// Dense n-dimensional array stored row-major (last axis fastest).
///
/// The element type is any arithmetic type; only float and double grids can
/// be serialized. Masks use std::uint8_t.
template <typename T>
class Grid {
 public:
  using value_type = T;

  Grid() = default;

  explicit Grid(Shape shape, T fill = T{}) : shape_(std::move(shape)) {
    validate_shape(shape_);
    data_.assign(element_count(shape_), fill);
  }

  Grid(Shape shape, std::vector<T> values) : shape_(std::move(shape)), data_(std::move(values)) {
    validate_shape(shape_);
    if (data_.size() != element_count(shape_))
      throw ShapeError("grid of shape " + shape_to_string(shape_) + " needs " +
                       std::to_string(element_count(shape_)) + " values, got " +
                       std::to_string(data_.size()));
  }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t ndim() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  std::size_t extent(std::size_t axis) const { return shape_.at(axis); }

  std::span<const T> values() const& noexcept { return data_; }
  std::span<T> values() & noexcept { return data_; }
  // A view into a temporary grid would dangle.
  std::span<const T> values() const&& = delete;
  const T* data() const noexcept { return data_.data(); }
  T* data() noexcept { return data_.data(); }

  const T& operator[](std::size_t flat) const noexcept { return data_[flat]; }
  T& operator[](std::size_t flat) noexcept { return data_[flat]; }

  std::size_t flat_index(std::span<const std::size_t> index) const {
    if (index.size() != shape_.size()) throw ShapeError("index rank does not match grid rank");
    std::size_t flat = 0;
    for (std::size_t d = 0; d < shape_.size(); ++d) {
      if (index[d] >= shape_[d]) throw ShapeError("index out of range");
      flat = flat * shape_[d] + index[d];
    }
    return flat;
  }

  const T& at(std::initializer_list<std::size_t> index) const {
    return data_[flat_index(std::span(index.begin(), index.size()))];
  }
  T& at(std::initializer_list<std::size_t> index) {
    return data_[flat_index(std::span(index.begin(), index.size()))];
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  Shape shape_;
  std::vector<T> data_;
};

template <typename T>
Grid<T> make_grid(Shape shape, std::vector<T> values) {
  return Grid<T>(std::move(shape), std::move(values));
}

template <typename To, typename From>
Grid<To> grid_cast(const Grid<From>& g) {
  std::vector<To> out(g.values().begin(), g.values().end());
  return Grid<To>(g.shape(), std::move(out));
}

inline void require_same_shape(const Shape& a, const Shape& b) {
  if (a != b)
    throw ShapeError("both grids must be the same size: " + shape_to_string(a) + " vs " +
                     shape_to_string(b));
}

template <typename T>
Grid<T> elementwise_product(const Grid<T>& a, const Grid<T>& b) {
  require_same_shape(a.shape(), b.shape());
  std::vector<T> out(a.size());
  std::transform(a.values().begin(), a.values().end(), b.values().begin(), out.begin(),
                 [](T u, T v) { return u * v; });
  return Grid<T>(a.shape(), std::move(out));
}

/// Missing-data convention: a sample is missing iff it is <= missing_threshold.
/// fill_value marks every output position whose correlation is undefined.
struct MissingPolicy {
  double missing_threshold = -999.0;
  double fill_value = -2.0;

  bool is_missing(double v) const noexcept { return v <= missing_threshold; }

  // Fills must never be mistaken for a coefficient.
  bool fill_is_distinguishable() const noexcept {
    return fill_value <= missing_threshold || fill_value < -1.0 || fill_value > 1.0;
  }

  void validate() const {
    if (!fill_is_distinguishable())
      throw ParameterError("fill value must lie outside [-1, 1] or at/below the missing threshold");
  }
};

template <typename T>
Grid<std::uint8_t> missing_mask(const Grid<T>& g, const MissingPolicy& policy) {
  std::vector<std::uint8_t> out(g.size());
  std::transform(g.values().begin(), g.values().end(), out.begin(), [&](T v) {
    return static_cast<std::uint8_t>(policy.is_missing(static_cast<double>(v)) ? 1 : 0);
  });
  return Grid<std::uint8_t>(g.shape(), std::move(out));
}

}  // namespace swcorr
