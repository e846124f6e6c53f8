#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "swcorr/errors.hpp"
#include "swcorr/grid.hpp"

namespace swcorr {

/// Per-axis odd window lengths. The result of a window is written to its
/// middle cell, so every length must be odd.
class WindowSpec {
 public:
  explicit WindowSpec(std::vector<std::size_t> lengths) : lengths_(std::move(lengths)) {
    if (lengths_.empty()) throw ParameterError("window must have at least one axis");
    for (std::size_t k : lengths_)
      if (k == 0 || k % 2 == 0)
        throw ParameterError("window lengths must be odd, got " + std::to_string(k));
  }

  // Same length on every axis ("--window 7" on a 2-D grid means 7x7).
  static WindowSpec uniform(std::size_t k, std::size_t ndim) {
    return WindowSpec(std::vector<std::size_t>(ndim, k));
  }

  const std::vector<std::size_t>& lengths() const noexcept { return lengths_; }
  std::size_t ndim() const noexcept { return lengths_.size(); }
  std::size_t length(std::size_t axis) const { return lengths_.at(axis); }
  std::size_t radius(std::size_t axis) const { return lengths_.at(axis) / 2; }

  std::size_t sample_count() const noexcept { return element_count(lengths_); }

  // Throws ShapeError unless the window has the grid's rank and fits on every axis.
  void require_fits(const Shape& shape) const {
    if (shape.size() != lengths_.size())
      throw ShapeError("window rank " + std::to_string(lengths_.size()) +
                       " does not match grid rank " + std::to_string(shape.size()));
    for (std::size_t d = 0; d < shape.size(); ++d)
      if (lengths_[d] > shape[d])
        throw ShapeError("window length " + std::to_string(lengths_[d]) + " exceeds extent " +
                         std::to_string(shape[d]) + " on axis " + std::to_string(d));
  }

  // True when the window centered at `index` lies entirely inside `shape`.
  template <typename Index>
  bool fits_at(const Shape& shape, const Index& index) const {
    for (std::size_t d = 0; d < shape.size(); ++d) {
      const std::size_t r = radius(d);
      if (index[d] < r || index[d] + r >= shape[d]) return false;
    }
    return true;
  }

  friend bool operator==(const WindowSpec&, const WindowSpec&) = default;

 private:
  std::vector<std::size_t> lengths_;
};

inline std::string window_to_string(const WindowSpec& w) { return shape_to_string(w.lengths()); }

}  // namespace swcorr
