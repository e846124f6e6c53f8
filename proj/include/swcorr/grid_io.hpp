#pragma once

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "swcorr/errors.hpp"
#include "swcorr/grid.hpp"

namespace swcorr::io {

// SWGRID: one ASCII line "SWGRID 1 <f32|f64> <ndim> <d0> ... <dn-1>\n", then
// product(extents) little-endian IEEE-754 values in row-major order.
inline constexpr std::string_view kMagic = "SWGRID";
inline constexpr int kVersion = 1;

using AnyGrid = std::variant<Grid<float>, Grid<double>>;

struct GridFileHeader {
  ElementKind element_kind = ElementKind::f64;
  Shape extents;
};

inline std::string_view kind_name(ElementKind k) { return k == ElementKind::f32 ? "f32" : "f64"; }

inline std::string format_header(const GridFileHeader& h) {
  std::string line = std::string(kMagic) + " " + std::to_string(kVersion) + " " +
                     std::string(kind_name(h.element_kind)) + " " + std::to_string(h.extents.size());
  for (std::size_t e : h.extents) line += " " + std::to_string(e);
  line += '\n';
  return line;
}

namespace detail {

template <typename U>
void to_little_endian(U& bits) {
  if constexpr (std::endian::native == std::endian::big) {
    U swapped = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) swapped = (swapped << 8) | ((bits >> (8 * i)) & 0xff);
    bits = swapped;
  }
}

template <typename T>
using bits_t = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;

}  // namespace detail

template <typename T>
void write_grid(const Grid<T>& g, std::ostream& sink) {
  const std::string header = format_header({element_kind_of<T>(), g.shape()});
  sink.write(header.data(), static_cast<std::streamsize>(header.size()));
  std::vector<char> payload(g.size() * sizeof(T));
  for (std::size_t i = 0; i < g.size(); ++i) {
    auto bits = std::bit_cast<detail::bits_t<T>>(g[i]);
    detail::to_little_endian(bits);
    std::memcpy(payload.data() + i * sizeof(T), &bits, sizeof(T));
  }
  sink.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!sink) throw IoError("failed to write grid");
}

inline GridFileHeader parse_header(const std::string& line) {
  std::istringstream in(line);
  std::string magic, kind;
  long long version = 0, ndim = 0;
  if (!(in >> magic) || magic != kMagic) throw FormatError("not an SWGRID stream (bad magic)");
  if (!(in >> version)) throw FormatError("SWGRID header: missing version");
  if (version != kVersion) throw FormatError("SWGRID header: unsupported version " + std::to_string(version));
  if (!(in >> kind)) throw FormatError("SWGRID header: missing element kind");
  GridFileHeader h;
  if (kind == "f32")
    h.element_kind = ElementKind::f32;
  else if (kind == "f64")
    h.element_kind = ElementKind::f64;
  else
    throw FormatError("SWGRID header: unknown element kind '" + kind + "'");
  if (!(in >> ndim) || ndim < 1) throw FormatError("SWGRID header: ndim must be >= 1");
  for (long long d = 0; d < ndim; ++d) {
    long long e = 0;
    if (!(in >> e) || e < 1) throw FormatError("SWGRID header: extents must be >= 1");
    h.extents.push_back(static_cast<std::size_t>(e));
  }
  std::string extra;
  if (in >> extra) throw FormatError("SWGRID header: trailing tokens");
  return h;
}

namespace detail {

template <typename T>
Grid<T> read_payload(std::istream& source, const Shape& extents) {
  const std::size_t count = element_count(extents);
  std::vector<char> payload(count * sizeof(T));
  source.read(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (static_cast<std::size_t>(source.gcount()) != payload.size())
    throw FormatError("SWGRID payload truncated: expected " + std::to_string(payload.size()) +
                      " bytes, got " + std::to_string(source.gcount()));
  if (source.peek() != std::char_traits<char>::eof())
    throw FormatError("SWGRID payload longer than the header declares");
  std::vector<T> values(count);
  for (std::size_t i = 0; i < count; ++i) {
    bits_t<T> bits;
    std::memcpy(&bits, payload.data() + i * sizeof(T), sizeof(T));
    to_little_endian(bits);
    values[i] = std::bit_cast<T>(bits);
  }
  return Grid<T>(extents, std::move(values));
}

}  // namespace detail

inline AnyGrid read_grid(std::istream& source) {
  std::string line;
  if (!std::getline(source, line)) throw FormatError("empty SWGRID stream");
  const GridFileHeader h = parse_header(line);
  if (h.element_kind == ElementKind::f32) return detail::read_payload<float>(source, h.extents);
  return detail::read_payload<double>(source, h.extents);
}

// Any stored kind, widened to double.
inline Grid<double> read_grid_f64(std::istream& source) {
  return std::visit([](const auto& g) { return grid_cast<double>(g); }, read_grid(source));
}

/// Comma-separated decimal table, one row per line, into a 2-D grid.
inline Grid<double> read_csv_2d(std::istream& source) {
  std::vector<double> values;
  std::size_t rows = 0, cols = 0;
  std::string line;
  while (std::getline(source, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t fields = 0;
    std::string_view rest = line;
    while (true) {
      const auto comma = rest.find(',');
      std::string_view cell = rest.substr(0, comma);
      while (!cell.empty() && cell.front() == ' ') cell.remove_prefix(1);
      while (!cell.empty() && cell.back() == ' ') cell.remove_suffix(1);
      if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (cell.empty() || ec != std::errc{} || ptr != cell.data() + cell.size())
        throw FormatError("CSV row " + std::to_string(rows + 1) + ": non-numeric cell '" +
                          std::string(cell) + "'");
      values.push_back(v);
      ++fields;
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (rows == 0)
      cols = fields;
    else if (fields != cols)
      throw FormatError("CSV row " + std::to_string(rows + 1) + " has " + std::to_string(fields) +
                        " cells, expected " + std::to_string(cols));
    ++rows;
  }
  if (rows == 0) throw FormatError("CSV input is empty");
  return Grid<double>({rows, cols}, std::move(values));
}

template <typename T>
void write_csv_2d(const Grid<T>& g, std::ostream& sink) {
  if (g.ndim() != 2) throw ShapeError("CSV output needs a 2-D grid, got rank " + std::to_string(g.ndim()));
  char buf[64];
  const std::size_t cols = g.extent(1);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto [end, ec] =
        std::to_chars(buf, buf + sizeof buf, static_cast<double>(g[i]), std::chars_format::general, 17);
    sink.write(buf, end - buf);
    sink.put((i + 1) % cols == 0 ? '\n' : ',');
  }
  if (!sink) throw IoError("failed to write CSV");
}

}  // namespace swcorr::io
