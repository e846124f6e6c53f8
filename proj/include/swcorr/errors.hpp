#pragma once

#include <stdexcept>
#include <string>

namespace swcorr {

// Grid extents disagree, or a window does not fit inside a grid.
class ShapeError : public std::invalid_argument {
 public:
  explicit ShapeError(const std::string& what) : std::invalid_argument(what) {}
};

// An argument is outside its documented domain (even window length, n > extent, ...).
class ParameterError : public std::invalid_argument {
 public:
  explicit ParameterError(const std::string& what) : std::invalid_argument(what) {}
};

// Malformed SWGRID or CSV input.
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace swcorr
