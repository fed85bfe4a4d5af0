// End-to-end acceptance checks. Prints one PASS/FAIL/SKIP line per criterion
// and exits non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "paropt/bench.hpp"
#include "paropt/evaluator.hpp"
#include "paropt/iteration_log.hpp"
#include "paropt/optimizers.hpp"
#include "paropt/problems.hpp"

using namespace paropt;

namespace {

enum class Outcome { pass, fail, skip };

struct Verdict {
  Outcome outcome;
  std::string detail;
};

Verdict pass(std::string d) { return {Outcome::pass, std::move(d)}; }
Verdict fail(std::string d) { return {Outcome::fail, std::move(d)}; }
Verdict check(bool ok, std::string d) { return {ok ? Outcome::pass : Outcome::fail, std::move(d)}; }

template <class... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(),
                    [](double x, double y) { return std::memcmp(&x, &y, sizeof x) == 0; });
}

bool bit_equal(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------

Verdict bit_identity() {
  std::vector<Problem> problems;
  for (std::size_t p = 1; p <= 5; ++p) {
    Problem q = quadratic_problem(p);
    for (std::size_t i = 0; i < p; ++i) q.default_par0[i] = 0.5 + static_cast<double>(i);
    problems.push_back(q);
  }
  problems.push_back(rosenbrock_problem());
  problems.push_back(normal_negll_problem(gen_normal_dataset(1000, 5.0, 2.0, 20190101)));

  int compared = 0;
  for (const auto& pr : problems) {
    for (bool analytic : {false, true}) {
      OptimOptions o;
      o.lower = pr.lower;
      o.upper = pr.upper;
      o.maxit = 200;
      const Gradient g = analytic ? pr.gradient : Gradient{};
      o.workers = 1;
      const auto a = optimize(pr.objective, g, pr.default_par0, o);
      o.workers = 8;
      const auto b = optimize(pr.objective, g, pr.default_par0, o);
      if (!bit_equal(a.par, b.par) || !bit_equal(a.value, b.value) || !(a.counts == b.counts) ||
          a.convergence != b.convergence || a.iterations != b.iterations) {
        return fail(pr.name + (analytic ? " (analytic)" : " (central)") + " differs between 1 and 8 workers");
      }
      ++compared;
    }
  }
  return pass(fmt("%d runs bitwise identical for workers 1 vs 8", compared));
}

Verdict normal_mle_correctness() {
  const auto data = gen_normal_dataset(1000, 5.0, 2.0, 20190101);
  // Oracle: two-pass mean and mean squared deviation, independent of the library.
  double mean = 0.0;
  for (double x : data) mean += x;
  mean /= static_cast<double>(data.size());
  double ss = 0.0;
  for (double x : data) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(data.size()));

  const Problem pr = normal_negll_problem(data);
  OptimOptions o;
  o.lower = {-INFINITY, 1e-4};
  o.upper = {INFINITY, INFINITY};
  const std::vector<double> par0{1.0, 1.0};
  const auto r = optimize(pr.objective, pr.gradient, par0, o);
  const auto rn = optimize(pr.objective, {}, par0, o);
  const double err = std::max(std::abs(r.par[0] - mean), std::abs(r.par[1] - sd));
  const double err_n = std::max(std::abs(rn.par[0] - mean), std::abs(rn.par[1] - sd));
  return check(r.convergence == Convergence::converged && rn.convergence == Convergence::converged &&
                   err <= 1e-4 && err_n <= 1e-4,
               fmt("oracle (%.6f, %.6f); analytic err %.2e, central err %.2e", mean, sd, err, err_n));
}

Verdict count_laws() {
  WorkerPool pool(4);
  std::string bad;
  for (std::size_t p = 1; p <= 6; ++p) {
    const Problem q = quadratic_problem(p);
    std::vector<double> x(p, 0.3);
    const std::vector<double> eps(p, kDefaultStep);
    CoupledEvaluator central(q.objective, GradientMode::central(), std::nullopt, eps, pool);
    central.gradient(x);
    if (central.counts().fn_calls != 1 + 2 * p || central.counts().batches != 1) bad += " central";
    CoupledEvaluator forward(q.objective, GradientMode::forward(), std::nullopt, eps, pool);
    forward.gradient(x);
    if (forward.counts().fn_calls != 1 + p || forward.counts().batches != 1) bad += " forward";
    for (auto mode : {GradientMode::central(), GradientMode::analytic(q.gradient)}) {
      CoupledEvaluator ev(q.objective, mode, std::nullopt, eps, pool);
      ev.value(x);
      ev.gradient(x);
      if (ev.counts().batches != 1) bad += " coupling";
    }
  }
  return check(bad.empty(), bad.empty() ? "1+2p, 1+p and one batch per value/gradient pair for p=1..6"
                                        : "violations:" + bad);
}

Verdict gradient_fidelity() {
  WorkerPool pool(4);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  double worst_quad = 0.0;
  for (int k = 0; k < 100; ++k) {
    const std::size_t p = 1 + static_cast<std::size_t>(k % 5);
    std::vector<double> x(p);
    for (double& v : x) v = u(rng);
    const Problem q = quadratic_problem(p);
    CoupledEvaluator ev(q.objective, GradientMode::central(), std::nullopt,
                        std::vector<double>(p, kDefaultStep), pool);
    const auto g = ev.gradient(x);
    for (std::size_t i = 0; i < p; ++i) worst_quad = std::max(worst_quad, std::abs(g[i] - 2.0 * x[i]));
  }

  const Problem rb = rosenbrock_problem();
  std::uniform_real_distribution<double> ux(rb.check_lower[0], rb.check_upper[0]);
  std::uniform_real_distribution<double> uy(rb.check_lower[1], rb.check_upper[1]);
  double worst_ratio = 0.0;
  for (int k = 0; k < 100; ++k) {
    const std::vector<double> x{ux(rng), uy(rng)};
    CoupledEvaluator ev(rb.objective, GradientMode::central(), std::nullopt, gradient_check_steps(x), pool);
    const auto g = ev.gradient(x);
    const auto ga = rb.gradient(x);
    const double tol = std::max(1e-6, 1e-4 * std::max(std::abs(ga[0]), std::abs(ga[1])));
    for (std::size_t i = 0; i < 2; ++i) worst_ratio = std::max(worst_ratio, std::abs(g[i] - ga[i]) / tol);
  }
  return check(worst_quad <= 1e-9 && worst_ratio <= 1.0,
               fmt("quadratic max error %.2e (limit 1e-9); rosenbrock worst error/tolerance %.3f",
                   worst_quad, worst_ratio));
}

// Mean elapsed-per-iteration per mode over the rows of a run.
std::map<BenchMode, double> mean_by_mode(const std::vector<BenchRow>& rows, std::string& errors) {
  std::map<BenchMode, std::pair<double, int>> acc;
  for (const auto& r : rows) {
    if (!r.error.empty()) errors += std::string(to_string(r.mode)) + ": " + r.error + "; ";
    auto& [s, n] = acc[r.mode];
    s += r.elapsed_per_iter_s;
    ++n;
  }
  std::map<BenchMode, double> out;
  for (const auto& [m, sn] : acc) out[m] = sn.first / sn.second;
  return out;
}

Verdict analytic_speedup() {
  BenchConfig c;
  c.dims = {3};
  c.sleeps = {0.2};
  c.modes = {BenchMode::serial_analytic, BenchMode::parallel_analytic};
  c.repetitions = 3;
  c.iterations = 5;
  c.workers = 2;
  std::string errors;
  const auto m = mean_by_mode(run_benchmark(c), errors);
  const double s = m.at(BenchMode::serial_analytic);
  const double par = m.at(BenchMode::parallel_analytic);
  return check(errors.empty() && std::abs(s - 0.4) <= 0.04 && par <= 0.30,
               fmt("serial %.3f s/iter (0.4 +- 10%%), parallel %.3f s/iter (<= 0.30), speedup %.2f%s", s,
                   par, s / par, errors.empty() ? "" : (" errors: " + errors).c_str()));
}

Verdict approx_speedup() {
  const unsigned cores = std::thread::hardware_concurrency();
  if (cores < 8) {
    return {Outcome::skip, fmt("needs >= 8 logical cores, this machine reports %u", cores)};
  }
  BenchConfig c;
  c.dims = {3};
  c.sleeps = {0.2};
  c.modes = {BenchMode::serial_approx, BenchMode::parallel_approx};
  c.repetitions = 3;
  c.iterations = 5;
  c.workers = 7;
  std::string errors;
  const auto m = mean_by_mode(run_benchmark(c), errors);
  const double s = m.at(BenchMode::serial_approx);
  const double par = m.at(BenchMode::parallel_approx);
  return check(errors.empty() && std::abs(s - 1.4) <= 0.14 && par <= 0.30,
               fmt("serial %.3f s/iter (1.4 +- 10%%), parallel %.3f s/iter (<= 0.30), speedup %.2f", s, par,
                   s / par));
}

Verdict overhead_budget() {
  BenchConfig c;
  c.dims = {1, 2, 3};
  c.sleeps = {0.0};
  c.modes = {BenchMode::parallel_analytic, BenchMode::parallel_approx, BenchMode::parallel_forward};
  c.repetitions = 3;
  c.iterations = 5;
  c.workers = 7;
  std::string errors;
  double worst = 0.0;
  for (const auto& r : run_benchmark(c)) {
    if (!r.error.empty()) errors += r.error + "; ";
    worst = std::max(worst, r.elapsed_per_iter_s);
  }
  return check(errors.empty() && worst < 0.05,
               fmt("worst parallel elapsed/iter at zero sleep %.2e s (< 0.05)", worst));
}

Verdict bound_feasibility() {
  std::mutex m;
  std::vector<std::vector<double>> seen;
  auto f = [&](std::span<const double> x) {
    {
      std::lock_guard lock(m);
      seen.emplace_back(x.begin(), x.end());
    }
    return (x[0] - 2.0) * (x[0] - 2.0);
  };
  OptimOptions o;
  o.lower = {-INFINITY};
  o.upper = {1.0};
  o.loginfo = true;
  o.workers = 3;
  std::string bad;
  for (double start : {-3.0, 0.0, 0.9995, 1.0}) {
    seen.clear();
    const std::vector<double> par0{start};
    const auto r = optimize(f, {}, par0, o);
    if (r.par[0] != 1.0) bad += fmt(" final par %.17g from %g;", r.par[0], start);
    for (const auto& row : r.log->rows()) {
      if (row.par[0] > 1.0) bad += fmt(" iterate %.17g;", row.par[0]);
    }
    for (const auto& pt : seen) {
      if (pt[0] > 1.0) bad += fmt(" stencil point %.17g;", pt[0]);
    }
  }
  return check(bad.empty(), bad.empty() ? "par == 1 exactly; iterates and stencil points within bounds"
                                        : "violations:" + bad);
}

Verdict log_contract() {
  const Problem pr = normal_negll_problem(gen_normal_dataset(1000, 5.0, 2.0, 7));
  OptimOptions o;
  o.lower = {-INFINITY, 1e-4};
  o.upper = {INFINITY, INFINITY};
  o.loginfo = true;
  o.workers = 4;
  const std::vector<double> par0{1.0, 1.0};
  const auto r = optimize(pr.objective, {}, par0, o);
  if (!r.log || r.log->size() < 2) return fail("no log recorded");
  const auto& first = r.log->rows().front();
  const auto& last = r.log->rows().back();

  WorkerPool pool(1);
  CoupledEvaluator ev(pr.objective, GradientMode::central(), Bounds{o.lower, o.upper},
                      std::vector<double>(2, kDefaultStep), pool);
  const auto& rec0 = ev.evaluate(par0);
  const bool first_ok = first.par == par0 && bit_equal(first.fn, rec0.value) && bit_equal(first.gr, rec0.gradient);
  const bool last_ok = bit_equal(last.par, r.par) && bit_equal(last.fn, r.value);
  const IterationLog back = parse_log_csv(to_csv(*r.log));
  bool round_trip = back.size() == r.log->size();
  for (std::size_t i = 0; round_trip && i < back.size(); ++i) {
    const auto& a = back.rows()[i];
    const auto& b = r.log->rows()[i];
    round_trip = a.iter == b.iter && bit_equal(a.par, b.par) && bit_equal(a.fn, b.fn) && bit_equal(a.gr, b.gr);
  }
  return check(first_ok && last_ok && round_trip,
               fmt("%zu rows; first row is par0: %s; last row matches result: %s; CSV round trip: %s",
                   r.log->size(), first_ok ? "yes" : "no", last_ok ? "yes" : "no", round_trip ? "yes" : "no"));
}

Verdict grid_shape() {
  BenchConfig c;
  c.dims = {1, 2, 3};
  c.sleeps = {0.0, 0.1, 0.2};
  c.modes = {BenchMode::serial_approx, BenchMode::parallel_approx};
  c.repetitions = 3;
  c.iterations = 5;
  c.workers = 7;
  const auto rows = run_benchmark(c);
  const std::string csv = emit_bench_csv(rows);
  if (csv.rfind("mode,p,sleep,rep,elapsed_per_iter,batches,fn_calls\n", 0) != 0) return fail("bad CSV header");

  std::map<std::pair<BenchMode, std::size_t>, std::map<double, std::pair<double, int>>> acc;
  for (const auto& r : rows) {
    if (!r.error.empty()) return fail(std::string("row error: ") + r.error);
    auto& [s, n] = acc[{r.mode, r.p}][r.sleep_s];
    s += r.elapsed_per_iter_s;
    ++n;
  }
  auto mean = [&](BenchMode m, std::size_t p, double sl) {
    const auto& [s, n] = acc[{m, p}][sl];
    return s / n;
  };

  std::string bad;
  double worst_spread = 0.0, worst_dev = 0.0;
  for (double sl : c.sleeps) {
    double lo = INFINITY, hi = 0.0;
    for (std::size_t p : c.dims) {
      lo = std::min(lo, mean(BenchMode::parallel_approx, p, sl));
      hi = std::max(hi, mean(BenchMode::parallel_approx, p, sl));
    }
    worst_spread = std::max(worst_spread, hi - lo);
    if (hi - lo >= 0.05 + 0.10 * hi) bad += fmt(" parallel spread %.3f at sleep %g;", hi - lo, sl);
    if (sl == 0.0) continue;  // no evaluation cost to scale
    for (std::size_t p : c.dims) {
      const double expected = static_cast<double>(1 + 2 * p) * sl;
      const double got = mean(BenchMode::serial_approx, p, sl);
      const double dev = std::abs(got - expected) / expected;
      worst_dev = std::max(worst_dev, dev);
      if (dev > 0.15) bad += fmt(" serial p=%zu sleep %g: %.3f vs %.3f;", p, sl, got, expected);
    }
  }
  return check(bad.empty(), fmt("%zu rows; worst parallel spread %.3f s, worst serial deviation from (1+2p)*sleep %.1f%%",
                                rows.size(), worst_spread, 100.0 * worst_dev) +
                                (bad.empty() ? "" : " |" + bad));
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    Verdict (*run)();
  };
  const Criterion criteria[] = {
      {"parallel/serial bit identity", bit_identity},
      {"normal MLE correctness", normal_mle_correctness},
      {"evaluation-count laws", count_laws},
      {"gradient fidelity", gradient_fidelity},
      {"analytic-gradient speedup", analytic_speedup},
      {"approximate-gradient speedup", approx_speedup},
      {"overhead budget", overhead_budget},
      {"bound feasibility", bound_feasibility},
      {"log contract", log_contract},
      {"benchmark grid shape", grid_shape},
  };
  int failures = 0;
  int index = 0;
  for (const auto& c : criteria) {
    ++index;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = fail(std::string("exception: ") + e.what());
    }
    const char* tag = v.outcome == Outcome::pass ? "PASS" : v.outcome == Outcome::fail ? "FAIL" : "SKIP";
    failures += v.outcome == Outcome::fail;
    std::printf("%s  %2d %-30s %s (%.1f s)\n", tag, index, c.name, v.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
