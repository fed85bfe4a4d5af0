#pragma once

// Per-iteration timing of L-BFGS-B on a sleep-controlled quadratic, serial
// versus parallel evaluation, over a grid of dimension x sleep x mode.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "paropt/problems.hpp"

namespace paropt {

enum class BenchMode { serial_analytic, serial_approx, parallel_analytic, parallel_approx, parallel_forward };

const char* to_string(BenchMode m) noexcept;
std::optional<BenchMode> parse_bench_mode(std::string_view name) noexcept;

struct BenchConfig {
  std::vector<std::size_t> dims{1, 2, 3};
  std::vector<double> sleeps{0.0, 0.05, 0.2, 0.4, 0.6, 0.8, 1.0};
  std::vector<BenchMode> modes{BenchMode::serial_analytic, BenchMode::serial_approx,
                               BenchMode::parallel_analytic, BenchMode::parallel_approx,
                               BenchMode::parallel_forward};
  int repetitions = 5;
  int iterations = 5;
  std::size_t workers = 7;

  /// Throws ConfigError on an empty grid axis, p = 0, negative sleep, reps < 1 ...
  void validate() const;
};

struct BenchRow {
  BenchMode mode = BenchMode::serial_analytic;
  std::size_t p = 0;
  double sleep_s = 0.0;
  int rep = 0;  // 1-based
  double elapsed_per_iter_s = 0.0;
  std::uint64_t batches = 0;
  std::uint64_t fn_calls = 0;
  int iterations = 0;
  std::string error;  // optimizer failure for this row, empty on success
};

/// Objective sleeps `sleep_s` then returns sum par_i^2; gradient sleeps then returns 2 par.
Problem sleep_problem(std::size_t p, double sleep_s);

/// Called after each row is measured (progress reporting).
using BenchProgress = std::function<void(const BenchRow&)>;

/// Runs the grid in config order (mode, p, sleep, rep). Each (mode, p, sleep)
/// cell starts with one discarded warm-up run. Serial modes evaluate on a
/// one-slot pool; parallel modes share a pool of `config.workers` slots.
///
/// elapsed_per_iter is wall time divided by the number of evaluation batches,
/// i.e. by the number of objective/gradient couples the optimizer requested.
std::vector<BenchRow> run_benchmark(const BenchConfig& config, const BenchProgress& progress = {});

/// Header `mode,p,sleep,rep,elapsed_per_iter,batches,fn_calls`, one line per row.
std::string emit_bench_csv(const std::vector<BenchRow>& rows);

}  // namespace paropt
