#pragma once

#include <cstddef>

#include "swcorr/grid.hpp"
#include "swcorr/parallel.hpp"

namespace swcorr::detail {

// A grid viewed as `outer` blocks of `extent` x `inner` elements: lanes along
// the axis start at o*extent*inner + i and step by `inner`.
struct LaneGeometry {
  std::size_t outer = 1;
  std::size_t extent = 1;
  std::size_t inner = 1;

  LaneGeometry(const Shape& shape, std::size_t axis) : extent(shape.at(axis)) {
    for (std::size_t d = 0; d < axis; ++d) outer *= shape[d];
    for (std::size_t d = axis + 1; d < shape.size(); ++d) inner *= shape[d];
  }
};

// Visits lanes [range.begin, range.end) as runs of adjacent lanes sharing
// one outer block: fn(first_element_offset, run_width).
template <typename Fn>
void for_each_lane_run(const LaneGeometry& geo, IndexRange range, Fn&& fn) {
  std::size_t lane = range.begin;
  while (lane < range.end) {
    const std::size_t o = lane / geo.inner;
    const std::size_t i = lane % geo.inner;
    const std::size_t width = std::min(geo.inner - i, range.end - lane);
    fn(o * geo.extent * geo.inner + i, width);
    lane += width;
  }
}

}  // namespace swcorr::detail
