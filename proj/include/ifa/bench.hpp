#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ifa {

enum class BenchKind { linear, dense };
enum class SweepMode { square, fixed_m };

struct BenchSpec {
  BenchKind kind = BenchKind::linear;
  SweepMode sweep = SweepMode::square;
  std::size_t s_min = 256;
  std::size_t s_max = 16384;
  double factor = 2.0;       // geometric step
  std::size_t fixed_m = 1024;  // query count for the fixed_m sweep
  std::size_t dim = 32;        // attention inner dim
  std::size_t d_in = 32;       // input embedding width
  std::size_t reps = 5;        // timed repetitions (after warmup)
  std::size_t warmup = 2;
  std::uint64_t seed = 99;
};

struct BenchCell {
  std::size_t m = 0, n = 0;
  std::string kind;
  double mean_s = 0.0;
  double std_s = 0.0;
  std::size_t reps = 0;
  bool skipped = false;
  std::string note;
};

struct BenchResult {
  std::vector<BenchCell> cells;
  std::optional<double> slope;  // log-log fit of mean time vs the swept size
};

// Ordinary least squares slope of y on x.
double fit_loglog_slope(const std::vector<std::pair<double, double>>& points);

// Times the attention forward on random inputs over a geometric size grid.
// Wall times come from a monotonic clock; dense cells above the size guard
// are skipped with a note. Single-threaded by construction.
BenchResult run_bench(const BenchSpec& spec);

void write_bench_jsonl(const std::string& path, const BenchResult& result);

}  // namespace ifa
