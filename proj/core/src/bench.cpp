#include "paropt/bench.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <thread>

#include "paropt/optimizers.hpp"

namespace paropt {

const char* to_string(BenchMode m) noexcept {
  switch (m) {
    case BenchMode::serial_analytic: return "serial_analytic";
    case BenchMode::serial_approx: return "serial_approx";
    case BenchMode::parallel_analytic: return "parallel_analytic";
    case BenchMode::parallel_approx: return "parallel_approx";
    case BenchMode::parallel_forward: return "parallel_forward";
  }
  return "?";
}

std::optional<BenchMode> parse_bench_mode(std::string_view name) noexcept {
  for (auto m : {BenchMode::serial_analytic, BenchMode::serial_approx, BenchMode::parallel_analytic,
                 BenchMode::parallel_approx, BenchMode::parallel_forward}) {
    if (name == to_string(m)) return m;
  }
  return std::nullopt;
}

void BenchConfig::validate() const {
  if (dims.empty() || sleeps.empty() || modes.empty()) {
    throw ConfigError("benchmark grid has an empty axis");
  }
  for (auto p : dims) {
    if (p < 1) throw ConfigError("benchmark dimensions must be >= 1");
  }
  for (double s : sleeps) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw ConfigError("sleep durations must be >= 0");
  }
  if (repetitions < 1) throw ConfigError("repetitions must be >= 1");
  if (iterations < 1) throw ConfigError("iteration budget must be >= 1");
  if (workers < 1) throw ConfigError("workers must be >= 1");
}

Problem sleep_problem(std::size_t p, double sleep_s) {
  if (p == 0) throw ConfigError("sleep problem needs p >= 1");
  if (!(sleep_s >= 0.0)) throw ConfigError("sleep must be >= 0");
  const auto pause = std::chrono::duration<double>(sleep_s);
  Problem pr;
  pr.name = "sleep";
  pr.p = p;
  pr.objective = [pause](std::span<const double> x) {
    if (pause.count() > 0.0) std::this_thread::sleep_for(pause);
    double s = 0.0;
    for (double v : x) s += v * v;
    return s;
  };
  pr.gradient = [pause](std::span<const double> x) {
    if (pause.count() > 0.0) std::this_thread::sleep_for(pause);
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) g[i] = 2.0 * x[i];
    return g;
  };
  pr.default_par0.assign(p, 0.1);
  pr.check_lower.assign(p, -1.0);
  pr.check_upper.assign(p, 1.0);
  return pr;
}

namespace {

bool is_serial(BenchMode m) {
  return m == BenchMode::serial_analytic || m == BenchMode::serial_approx;
}

bool is_analytic(BenchMode m) {
  return m == BenchMode::serial_analytic || m == BenchMode::parallel_analytic;
}

BenchRow measure(BenchMode mode, std::size_t p, double sleep_s, int iterations, WorkerPool& pool) {
  const Problem pr = sleep_problem(p, sleep_s);
  OptimOptions opt;
  opt.method = Method::lbfgsb;
  opt.maxit = iterations;
  opt.scheme = mode == BenchMode::parallel_forward ? Scheme::forward : Scheme::central;
  opt.workers = pool.size();

  BenchRow row;
  row.mode = mode;
  row.p = p;
  row.sleep_s = sleep_s;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const OptimResult r = optimize(pr.objective, is_analytic(mode) ? pr.gradient : Gradient{},
                                   pr.default_par0, opt, &pool);
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    row.batches = r.counts.batches;
    row.fn_calls = r.counts.fn_calls;
    row.iterations = r.iterations;
    row.elapsed_per_iter_s = elapsed / static_cast<double>(r.counts.batches);
  } catch (const std::exception& e) {
    row.elapsed_per_iter_s = std::numeric_limits<double>::quiet_NaN();
    row.error = e.what();
  }
  return row;
}

}  // namespace

std::vector<BenchRow> run_benchmark(const BenchConfig& config, const BenchProgress& progress) {
  config.validate();
  WorkerPool serial(1);
  WorkerPool parallel(config.workers);

  std::vector<BenchRow> rows;
  for (BenchMode mode : config.modes) {
    WorkerPool& pool = is_serial(mode) ? serial : parallel;
    for (std::size_t p : config.dims) {
      for (double sleep_s : config.sleeps) {
        (void)measure(mode, p, sleep_s, config.iterations, pool);  // warm-up
        for (int rep = 1; rep <= config.repetitions; ++rep) {
          BenchRow row = measure(mode, p, sleep_s, config.iterations, pool);
          row.rep = rep;
          if (progress) progress(row);
          rows.push_back(std::move(row));
        }
      }
    }
  }
  return rows;
}

std::string emit_bench_csv(const std::vector<BenchRow>& rows) {
  std::string out = "mode,p,sleep,rep,elapsed_per_iter,batches,fn_calls\n";
  char buf[32];
  auto put = [&](double v) {
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, end);
  };
  for (const auto& r : rows) {
    out += to_string(r.mode);
    out += ',' + std::to_string(r.p) + ',';
    put(r.sleep_s);
    out += ',' + std::to_string(r.rep) + ',';
    put(r.elapsed_per_iter_s);
    out += ',' + std::to_string(r.batches) + ',' + std::to_string(r.fn_calls) + '\n';
  }
  return out;
}

}  // namespace paropt
