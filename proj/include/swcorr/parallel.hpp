#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "swcorr/grid.hpp"

namespace swcorr {

struct IndexRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const noexcept { return end - begin; }
  friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

// Work stages of the correlator. Element stages (products, final combine)
// split the flat element range; axis passes split the lanes along one axis.
struct Stage {
  enum class Kind { elementwise, axis_pass };
  Kind kind = Kind::elementwise;
  std::size_t axis = 0;

  static Stage elementwise() { return {Kind::elementwise, 0}; }
  static Stage axis_pass(std::size_t axis) { return {Kind::axis_pass, axis}; }
};

inline std::size_t resolve_threads(std::size_t requested) {
  if (requested != 0) return requested;
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

// Splits [0, items) into at most `threads` contiguous chunks whose sizes
// differ by at most one, larger chunks first.
inline std::vector<IndexRange> split_range(std::size_t items, std::size_t threads) {
  std::vector<IndexRange> chunks;
  if (items == 0) return chunks;
  const std::size_t count = std::min(items, std::max<std::size_t>(1, threads));
  const std::size_t base = items / count;
  const std::size_t extra = items % count;
  std::size_t at = 0;
  for (std::size_t c = 0; c < count; ++c) {
    const std::size_t len = base + (c < extra ? 1 : 0);
    chunks.push_back({at, at + len});
    at += len;
  }
  return chunks;
}

// Number of 1-D lanes along `axis` (rows for the last axis of a 2-D grid).
inline std::size_t lane_count(const Shape& shape, std::size_t axis) {
  return element_count(shape) / shape.at(axis);
}

inline std::vector<IndexRange> plan_parallel(const Shape& shape, Stage stage, std::size_t threads) {
  if (threads == 0) throw ParameterError("plan_parallel needs at least one thread");
  const std::size_t items =
      stage.kind == Stage::Kind::elementwise ? element_count(shape) : lane_count(shape, stage.axis);
  return split_range(items, threads);
}

// Runs fn(range) for every chunk, one thread per chunk, and joins before
// returning. The first exception thrown by any chunk is rethrown.
template <typename Fn>
void run_chunks(const std::vector<IndexRange>& chunks, Fn&& fn) {
  if (chunks.size() <= 1) {
    for (const auto& c : chunks) fn(c);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> workers;
    workers.reserve(chunks.size() - 1);
    auto guarded = [&](IndexRange c) {
      try {
        fn(c);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    };
    for (std::size_t i = 1; i < chunks.size(); ++i) workers.emplace_back(guarded, chunks[i]);
    guarded(chunks[0]);
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace swcorr
