#include "ifa/bench.hpp"

#include <chrono>
#include <cmath>
#include <fstream>

#include "ifa/attention.hpp"
#include "ifa/errors.hpp"
#include "ifa/matrix.hpp"
#include "ifa/rng.hpp"

namespace ifa {

namespace {

volatile double g_sink = 0.0;  // defeats dead-code elimination of timed calls

double time_once(BenchKind kind, const Matrix& e_q, const Matrix& e_k, const Matrix& e_v,
                 const AttentionParams& p) {
  const auto t0 = std::chrono::steady_clock::now();
  if (kind == BenchKind::linear) {
    const AttentionOutput o =
        linear_attention_forward(e_q, e_k, e_v, p, KernelKind::softplus, true);
    g_sink = g_sink + o.output(0, 0);
  } else {
    const Matrix o = dense_kernel_attention_oracle(e_q, e_k, e_v, p, KernelKind::softplus);
    g_sink = g_sink + o(0, 0);
  }
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(t1 - t0).count();
}

}  // namespace

double fit_loglog_slope(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 2) throw UsageError("slope fit needs at least two points");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : points) {
    const double lx = std::log(x), ly = std::log(y);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double n = static_cast<double>(points.size());
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

BenchResult run_bench(const BenchSpec& spec) {
  if (spec.reps < 5) throw ConfigError("bench: at least 5 repetitions required");
  if (spec.factor <= 1.0) throw ConfigError("bench: grid factor must be > 1");
  if (spec.s_min < 1 || spec.s_min > spec.s_max) throw ConfigError("bench: bad size range");

  Rng rng(spec.seed);
  const AttentionParams params =
      AttentionParams::init(spec.d_in, spec.d_in, spec.d_in, spec.dim, rng);

  BenchResult result;
  std::vector<std::pair<double, double>> fit_points;

  for (double sd = static_cast<double>(spec.s_min); sd <= static_cast<double>(spec.s_max) + 0.5;
       sd *= spec.factor) {
    const std::size_t s = static_cast<std::size_t>(std::llround(sd));
    const std::size_t m = spec.sweep == SweepMode::square ? s : spec.fixed_m;
    const std::size_t n = s;

    BenchCell cell;
    cell.m = m;
    cell.n = n;
    cell.kind = spec.kind == BenchKind::linear ? "linear" : "dense";

    if (spec.kind == BenchKind::dense && m * n > kDenseGuard) {
      cell.skipped = true;
      cell.note = "m*n exceeds dense size guard";
      result.cells.push_back(std::move(cell));
      continue;
    }

    Matrix e_q(m, spec.d_in), e_k(n, spec.d_in), e_v(n, spec.d_in);
    fill_uniform(e_q, rng, -1.0, 1.0);
    fill_uniform(e_k, rng, -1.0, 1.0);
    fill_uniform(e_v, rng, -1.0, 1.0);

    for (std::size_t w = 0; w < spec.warmup; ++w) time_once(spec.kind, e_q, e_k, e_v, params);

    std::vector<double> times(spec.reps);
    double sum = 0.0;
    for (std::size_t r = 0; r < spec.reps; ++r) {
      times[r] = time_once(spec.kind, e_q, e_k, e_v, params);
      sum += times[r];
    }
    cell.reps = spec.reps;
    cell.mean_s = sum / static_cast<double>(spec.reps);
    double var = 0.0;
    for (double t : times) var += (t - cell.mean_s) * (t - cell.mean_s);
    cell.std_s = std::sqrt(var / static_cast<double>(spec.reps));

    fit_points.emplace_back(static_cast<double>(s), cell.mean_s);
    result.cells.push_back(std::move(cell));
  }

  if (fit_points.size() >= 2) result.slope = fit_loglog_slope(fit_points);
  return result;
}

void write_bench_jsonl(const std::string& path, const BenchResult& result) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("bench: cannot open '" + path + "' for writing");
  for (const BenchCell& c : result.cells) {
    os << "{\"m\":" << c.m << ",\"n\":" << c.n << ",\"kind\":\"" << c.kind << "\"";
    if (c.skipped) {
      os << ",\"skipped\":true,\"note\":\"" << c.note << "\"}";
    } else {
      os << ",\"mean_s\":" << c.mean_s << ",\"std_s\":" << c.std_s << ",\"reps\":" << c.reps
         << "}";
    }
    os << "\n";
  }
  if (result.slope) os << "{\"slope\":" << *result.slope << "}\n";
}

}  // namespace ifa
