#pragma once

// Command implementations for the swcorr tool. Kept in a header so the test
// suite can drive the commands in-process.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "swcorr/swcorr.hpp"

namespace swcorr::cli {

// Bad flags; maps to exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

namespace detail {

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

inline std::vector<std::size_t> parse_extents(const std::string& text, char sep, const char* what) {
  std::vector<std::size_t> out;
  std::stringstream in(text);
  std::string part;
  while (std::getline(in, part, sep)) {
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(part, &pos);
    } catch (const std::exception&) {
      throw UsageError(std::string("invalid ") + what + " '" + text + "'");
    }
    if (pos != part.size() || v == 0 || part.front() == '-')
      throw UsageError(std::string("invalid ") + what + " '" + text + "'");
    out.push_back(static_cast<std::size_t>(v));
  }
  if (out.empty()) throw UsageError(std::string("empty ") + what);
  return out;
}

inline std::vector<std::size_t> parse_window_lengths(const std::string& text) {
  auto lengths = parse_extents(text, ',', "window");
  for (std::size_t k : lengths)
    if (k % 2 == 0) throw UsageError("window lengths must be odd");
  return lengths;
}

inline WindowSpec window_for(const std::vector<std::size_t>& lengths, std::size_t ndim) {
  if (lengths.size() == 1) return WindowSpec::uniform(lengths[0], ndim);
  return WindowSpec(lengths);
}

inline std::vector<Backend> parse_backends(const std::string& text) {
  std::vector<Backend> out;
  std::stringstream in(text);
  std::string part;
  while (std::getline(in, part, ',')) {
    try {
      out.push_back(parse_backend(part));
    } catch (const ParameterError& e) {
      throw UsageError(e.what());
    }
  }
  if (out.empty()) throw UsageError("no backends given");
  return out;
}

inline bool has_suffix(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

inline io::AnyGrid load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  if (has_suffix(path, ".csv")) return io::read_csv_2d(in);
  return io::read_grid(in);
}

template <typename T>
void save(const Grid<T>& g, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  if (has_suffix(path, ".csv"))
    io::write_csv_2d(g, out);
  else
    io::write_grid(g, out);
}

// Both inputs at a common precision: f32 only when both files are f32.
struct InputPair {
  std::variant<std::pair<Grid<float>, Grid<float>>, std::pair<Grid<double>, Grid<double>>> grids;

  const Shape& shape() const {
    return std::visit([](const auto& p) -> const Shape& { return p.first.shape(); }, grids);
  }
};

inline InputPair load_pair(const std::string& x_path, const std::string& y_path) {
  io::AnyGrid x = load(x_path);
  io::AnyGrid y = load(y_path);
  if (std::holds_alternative<Grid<float>>(x) && std::holds_alternative<Grid<float>>(y))
    return {std::pair{std::get<Grid<float>>(std::move(x)), std::get<Grid<float>>(std::move(y))}};
  auto widen = [](const io::AnyGrid& g) {
    return std::visit([](const auto& v) { return grid_cast<double>(v); }, g);
  };
  return {std::pair{widen(x), widen(y)}};
}

struct CorrelationFlags {
  std::string x_path, y_path;
  std::string window = "7";
  std::size_t threads = 0;
  double missing_le = -999.0;
  double fill = -2.0;
  double epsilon = 0.0;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--x", x_path, "First input grid (SWGRID or .csv)")->required();
    cmd->add_option("--y", y_path, "Second input grid, same shape as --x")->required();
    cmd->add_option("--window", window, "Odd window lengths k0[,k1,...]; one value applies to every axis")
        ->capture_default_str();
    cmd->add_option("--threads", threads, "Worker threads (0 = all cores)")->capture_default_str();
    cmd->add_option("--missing-le", missing_le, "Samples <= this value are missing")->capture_default_str();
    cmd->add_option("--fill", fill, "Output value for undefined positions")->capture_default_str();
    cmd->add_option("--epsilon", epsilon, "Relative variance threshold for degenerate windows")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
  }

  MissingPolicy policy() const {
    MissingPolicy p{missing_le, fill};
    if (!p.fill_is_distinguishable())
      throw UsageError("--fill must lie outside [-1, 1] or at/below --missing-le");
    return p;
  }
};

template <typename T>
CorrelationMap run_backend(const std::pair<Grid<T>, Grid<T>>& xy, const WindowSpec& w,
                           const MissingPolicy& policy, Backend backend, std::size_t threads,
                           double epsilon) {
  CorrelatorConfig cfg;
  cfg.backend = backend;
  cfg.threads = threads;
  cfg.constant_epsilon = epsilon;
  return correlate(xy.first, xy.second, w, policy, cfg);
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace detail

inline int cmd_correlate(detail::CorrelationFlags& flags, const std::string& out_path,
                         const std::string& backend_name, std::ostream& err) {
  const auto lengths = detail::parse_window_lengths(flags.window);
  const Backend backend = detail::parse_backends(backend_name).front();
  const MissingPolicy policy = flags.policy();

  auto t0 = detail::Clock::now();
  const auto inputs = detail::load_pair(flags.x_path, flags.y_path);
  const double read_s = detail::seconds_since(t0);

  const WindowSpec w = detail::window_for(lengths, inputs.shape().size());
  t0 = detail::Clock::now();
  const CorrelationMap map = std::visit(
      [&](const auto& xy) {
        return detail::run_backend(xy, w, policy, backend, flags.threads, flags.epsilon);
      },
      inputs.grids);
  const double compute_s = detail::seconds_since(t0);

  t0 = detail::Clock::now();
  detail::save(map.grid, out_path);
  const double write_s = detail::seconds_since(t0);

  err << std::fixed << std::setprecision(6) << "read " << read_s << " s, compute " << compute_s
      << " s (" << to_string(backend) << "), write " << write_s << " s\n";
  return kExitOk;
}

inline int cmd_compare(detail::CorrelationFlags& flags, const std::string& backend_list, double tol,
                       std::ostream& out) {
  const auto lengths = detail::parse_window_lengths(flags.window);
  const auto backends = detail::parse_backends(backend_list);
  const MissingPolicy policy = flags.policy();
  const auto inputs = detail::load_pair(flags.x_path, flags.y_path);
  const WindowSpec w = detail::window_for(lengths, inputs.shape().size());

  const Grid<double> reference = std::visit(
      [&](const auto& xy) { return naive_correlate_map(xy.first, xy.second, w, policy); },
      inputs.grids);

  bool all_pass = true;
  for (Backend b : backends) {
    const CorrelationMap map = std::visit(
        [&](const auto& xy) { return detail::run_backend(xy, w, policy, b, flags.threads, flags.epsilon); },
        inputs.grids);
    double max_diff = 0.0;
    std::size_t mismatches = 0;
    for (std::size_t i = 0; i < reference.size(); ++i) {
      const bool ref_fill = reference[i] == policy.fill_value;
      const bool got_fill = map.grid[i] == policy.fill_value;
      if (ref_fill != got_fill)
        ++mismatches;
      else if (!ref_fill)
        max_diff = std::max(max_diff, std::abs(map.grid[i] - reference[i]));
    }
    const bool pass = max_diff < tol && mismatches == 0;
    all_pass = all_pass && pass;
    out << "backend=" << to_string(b) << " max_abs_diff=" << std::setprecision(6) << std::scientific
        << max_diff << " fill_mismatches=" << mismatches << " tol=" << tol << " "
        << (pass ? "PASS" : "FAIL") << "\n";
  }
  return all_pass ? kExitOk : kExitFailure;
}

struct BenchOptions {
  std::string size = "1024x1024";
  std::string window = "7";
  std::string backends = "naive,separable,cumsum";
  std::size_t repeat = 3;
  std::size_t threads = 1;
  std::string format = "text";
  std::uint64_t seed = 42;
};

struct BenchEntry {
  Backend backend;
  double seconds_median;
};

struct BenchReport {
  Shape shape;
  std::vector<std::size_t> window;
  std::size_t threads = 1;
  std::size_t repeats = 1;
  std::vector<BenchEntry> backends;
  std::optional<double> predicted_ratio;
  std::optional<double> measured_ratio_vs_naive;
};

inline nlohmann::json to_json(const BenchReport& r) {
  nlohmann::json j;
  j["shape"] = r.shape;
  j["window"] = r.window;
  j["threads"] = r.threads;
  j["repeats"] = r.repeats;
  j["backends"] = nlohmann::json::array();
  for (const auto& b : r.backends)
    j["backends"].push_back({{"name", std::string(to_string(b.backend))}, {"seconds_median", b.seconds_median}});
  j["predicted_ratio"] = r.predicted_ratio ? nlohmann::json(*r.predicted_ratio) : nlohmann::json(nullptr);
  j["measured_ratio_vs_naive"] =
      r.measured_ratio_vs_naive ? nlohmann::json(*r.measured_ratio_vs_naive) : nlohmann::json(nullptr);
  return j;
}

// Times each backend on seeded random inputs; compute only, generation excluded.
inline BenchReport run_bench(const BenchOptions& opt) {
  if (opt.repeat < 1) throw UsageError("--repeat must be >= 1");
  const Shape shape = detail::parse_extents(opt.size, 'x', "size");
  const auto lengths = detail::parse_window_lengths(opt.window);
  const auto backends = detail::parse_backends(opt.backends);
  const WindowSpec w = detail::window_for(lengths, shape.size());
  w.require_fits(shape);

  const Grid<double> x = synthetic::random(shape, opt.seed);
  const Grid<double> y = synthetic::random(shape, opt.seed + 1);

  BenchReport report;
  report.shape = shape;
  report.window = w.lengths();
  report.threads = resolve_threads(opt.threads);
  report.repeats = opt.repeat;
  CorrelatorConfig cfg;
  cfg.threads = opt.threads;
  for (Backend b : backends) {
    cfg.backend = b;
    std::vector<double> times;
    for (std::size_t r = 0; r < opt.repeat; ++r) {
      const auto t0 = detail::Clock::now();
      const CorrelationMap map = correlate(x, y, w, MissingPolicy{}, cfg);
      times.push_back(std::max(detail::seconds_since(t0), 1e-9));
      if (map.grid.size() != x.size()) throw std::logic_error("bench: bad output size");
    }
    report.backends.push_back({b, detail::median(times)});
  }

  const auto& ks = w.lengths();
  if (shape.size() == 2 && ks[0] == ks[1])
    report.predicted_ratio = cost::predict_ratio(ks[0], shape[0], shape[1]);
  auto find = [&](Backend b) -> std::optional<double> {
    for (const auto& e : report.backends)
      if (e.backend == b) return e.seconds_median;
    return std::nullopt;
  };
  if (auto naive = find(Backend::naive))
    if (auto sep = find(Backend::separable)) report.measured_ratio_vs_naive = *naive / *sep;
  return report;
}

inline void print_bench_text(const BenchReport& r, std::ostream& out) {
  out << "shape " << shape_to_string(r.shape) << ", window " << shape_to_string(r.window) << ", threads "
      << r.threads << ", repeats " << r.repeats << "\n";
  for (const auto& b : r.backends)
    out << "  " << std::left << std::setw(10) << to_string(b.backend) << std::right << std::fixed
        << std::setprecision(6) << b.seconds_median << " s (median)\n";
  out << std::setprecision(2);
  if (r.predicted_ratio) out << "predicted naive/separable op ratio: " << *r.predicted_ratio << "\n";
  if (r.measured_ratio_vs_naive) out << "measured naive/separable time ratio: " << *r.measured_ratio_vs_naive << "\n";
}

struct GenOptions {
  std::string size;
  std::string pattern = "random";
  std::uint64_t seed = 0;
  std::string out;
  std::string out2;
  double missing_frac = 0.0;
  std::string kind = "f64";
};

inline int cmd_gen(const GenOptions& opt) {
  const Shape shape = detail::parse_extents(opt.size, 'x', "size");
  if (opt.kind != "f32" && opt.kind != "f64") throw UsageError("--kind must be f32 or f64");
  if (!(opt.missing_frac >= 0.0 && opt.missing_frac <= 1.0))
    throw UsageError("--missing-frac must be in [0, 1]");

  std::optional<Grid<double>> second;
  Grid<double> first;
  if (opt.pattern == "random") {
    first = synthetic::random(shape, opt.seed);
  } else if (opt.pattern == "ramp") {
    first = synthetic::ramp(shape);
  } else if (opt.pattern == "anticorr") {
    if (opt.out2.empty()) throw UsageError("--pattern anticorr writes a pair; --out2 is required");
    auto [x, y] = synthetic::anticorrelated(shape, opt.seed);
    first = std::move(x);
    second = std::move(y);
  } else if (opt.pattern == "clouds") {
    auto [x, y] = synthetic::clouds(shape, opt.seed);
    first = std::move(x);
    if (!opt.out2.empty()) second = std::move(y);
  } else {
    throw UsageError("unknown pattern '" + opt.pattern + "'");
  }
  if (second && opt.out2.empty()) throw UsageError("--out2 is required for this pattern");

  synthetic::plant_missing(first, opt.missing_frac, opt.seed);
  if (second) synthetic::plant_missing(*second, opt.missing_frac, opt.seed + 1);

  auto emit = [&](const Grid<double>& g, const std::string& path) {
    if (opt.kind == "f32")
      detail::save(grid_cast<float>(g), path);
    else
      detail::save(g, path);
  };
  emit(first, opt.out);
  if (second) emit(*second, opt.out2);
  return kExitOk;
}

/// Entry point shared by the executable and the tests.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Sliding-window Pearson correlation of gridded data", "swcorr"};
  app.require_subcommand(1);

  detail::CorrelationFlags corr_flags;
  std::string corr_out, corr_backend = "separable";
  auto* correlate_cmd = app.add_subcommand("correlate", "Correlate two grids in a sliding window");
  corr_flags.add_to(correlate_cmd);
  correlate_cmd->add_option("--out", corr_out, "Output SWGRID (f64) or .csv")->required();
  correlate_cmd->add_option("--backend", corr_backend, "naive | separable | cumsum")->capture_default_str();

  detail::CorrelationFlags cmp_flags;
  std::string cmp_backends = "separable";
  double cmp_tol = 1e-3;
  auto* compare_cmd = app.add_subcommand("compare", "Compare backends against the classical reference");
  cmp_flags.add_to(compare_cmd);
  compare_cmd->add_option("--backends", cmp_backends, "Comma-separated backends")->capture_default_str();
  compare_cmd->add_option("--tol", cmp_tol, "Pass iff max |diff| < tol")->capture_default_str();

  BenchOptions bench;
  auto* bench_cmd = app.add_subcommand("bench", "Time backends on seeded random inputs");
  bench_cmd->add_option("--size", bench.size, "Grid extents, e.g. 1024x1024")->capture_default_str();
  bench_cmd->add_option("--window", bench.window, "Odd window lengths")->capture_default_str();
  bench_cmd->add_option("--backends", bench.backends, "Comma-separated backends")->capture_default_str();
  bench_cmd->add_option("--repeat", bench.repeat, "Runs per backend (median reported)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  bench_cmd->add_option("--threads", bench.threads, "Worker threads (0 = all cores)")->capture_default_str();
  bench_cmd->add_option("--format", bench.format, "text | json")
      ->capture_default_str()
      ->check(CLI::IsMember({"text", "json"}));
  bench_cmd->add_option("--seed", bench.seed, "Input generator seed")->capture_default_str();

  GenOptions gen;
  auto* gen_cmd = app.add_subcommand("gen", "Write a synthetic grid (or pair)");
  gen_cmd->add_option("--size", gen.size, "Grid extents, e.g. 64x64")->required();
  gen_cmd->add_option("--pattern", gen.pattern, "random | ramp | anticorr | clouds")->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed, "Generator seed")->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "Output path")->required();
  gen_cmd->add_option("--out2", gen.out2, "Second output path for paired patterns");
  gen_cmd->add_option("--missing-frac", gen.missing_frac, "Fraction of samples set to -999")
      ->capture_default_str();
  gen_cmd->add_option("--kind", gen.kind, "f32 | f64")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (*correlate_cmd) return cmd_correlate(corr_flags, corr_out, corr_backend, err);
    if (*compare_cmd) return cmd_compare(cmp_flags, cmp_backends, cmp_tol, out);
    if (*bench_cmd) {
      const BenchReport report = run_bench(bench);
      if (bench.format == "json")
        out << to_json(report).dump(2) << "\n";
      else
        print_bench_text(report, out);
      return kExitOk;
    }
    if (*gen_cmd) return cmd_gen(gen);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace swcorr::cli
