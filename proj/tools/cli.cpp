#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <thread>

#include "paropt/bench.hpp"
#include "paropt/problems.hpp"

namespace paropt::cli {

namespace {

std::string shortest(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::string join(std::span<const double> xs, const char* sep) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s += sep;
    s += shortest(xs[i]);
  }
  return s;
}

std::size_t default_workers(std::size_t fallback) {
  if (const char* env = std::getenv("PAROPT_WORKERS"); env && *env) {
    std::size_t n = 0;
    const std::string_view s(env);
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
    if (ec != std::errc{} || ptr != s.data() + s.size() || n == 0) {
      throw ConfigError("PAROPT_WORKERS must be a positive integer, got '" + std::string(s) + "'");
    }
    return n;
  }
  return fallback;
}

std::size_t hardware_workers() {
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw ConfigError("error writing '" + path + "'");
}

struct OptimizeArgs {
  std::string problem;
  std::string data;
  std::string par0;
  std::string method = "lbfgsb";
  std::string lower;
  std::string upper;
  std::string eps;
  std::string scheme = "central";
  int maxit = 100;
  std::size_t workers = 0;
  bool loginfo = false;
  std::string log_out;
  bool json = false;
  double sleep_s = 0.0;
};

int cmd_optimize(const OptimizeArgs& a, std::ostream& out) {
  ProblemArgs pa;
  pa.sleep_s = a.sleep_s;
  ParameterVector par0;
  if (!a.par0.empty()) {
    par0 = parse_real_list(a.par0);
    pa.p = par0.size();
  }
  if (!a.data.empty()) pa.data = load_dataset(a.data);
  const Problem pr = make_problem(a.problem, pa);
  if (par0.empty()) par0 = pr.default_par0;

  OptimOptions opt;
  const auto method = parse_method(a.method);
  if (!method) throw ConfigError("unknown method '" + a.method + "' (lbfgsb, bfgs, cg)");
  opt.method = *method;
  if (a.scheme == "central") {
    opt.scheme = Scheme::central;
  } else if (a.scheme == "forward") {
    opt.scheme = Scheme::forward;
  } else {
    throw ConfigError("unknown scheme '" + a.scheme + "' (central, forward)");
  }
  opt.lower = a.lower.empty() ? pr.lower : parse_real_list(a.lower);
  opt.upper = a.upper.empty() ? pr.upper : parse_real_list(a.upper);
  if (opt.method != Method::lbfgsb && a.lower.empty() && a.upper.empty()) {
    opt.lower.clear();
    opt.upper.clear();
  }
  if (!a.eps.empty()) opt.eps = parse_real_list(a.eps);
  opt.maxit = a.maxit;
  opt.workers = a.workers ? a.workers : default_workers(hardware_workers());
  opt.loginfo = a.loginfo || !a.log_out.empty();

  const OptimResult r = optimize(pr.objective, pr.gradient, par0, opt);
  if (!a.log_out.empty()) write_file(a.log_out, to_csv(*r.log));

  out << result_report(r, a.json);
  if (!a.json && r.log && a.log_out.empty()) out << "log:\n" << to_csv(*r.log);
  const bool ok = r.convergence == Convergence::converged ||
                  r.convergence == Convergence::maxit_reached;
  return ok ? kExitOk : kExitFailure;
}

struct BenchArgs {
  std::string dims;
  std::string sleeps;
  std::string modes;
  int reps = 5;
  int iters = 5;
  std::size_t workers = 0;
  std::string out;
};

int cmd_bench(const BenchArgs& a, std::ostream& out, std::ostream& err) {
  BenchConfig cfg;
  if (!a.dims.empty()) {
    cfg.dims.clear();
    for (double d : parse_real_list(a.dims)) {
      if (!(d >= 1.0) || d != std::floor(d)) throw ConfigError("--dims takes positive integers");
      cfg.dims.push_back(static_cast<std::size_t>(d));
    }
  }
  if (!a.sleeps.empty()) cfg.sleeps = parse_real_list(a.sleeps);
  if (!a.modes.empty()) {
    cfg.modes.clear();
    std::stringstream ss(a.modes);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      const auto m = parse_bench_mode(tok);
      if (!m) throw ConfigError("unknown bench mode '" + tok + "'");
      cfg.modes.push_back(*m);
    }
  }
  cfg.repetitions = a.reps;
  cfg.iterations = a.iters;
  cfg.workers = a.workers ? a.workers : default_workers(7);
  cfg.validate();

  const auto rows = run_benchmark(cfg, [&err](const BenchRow& r) {
    err << to_string(r.mode) << " p=" << r.p << " sleep=" << r.sleep_s << " rep=" << r.rep
        << " elapsed/iter=" << r.elapsed_per_iter_s << "s";
    if (!r.error.empty()) err << " error: " << r.error;
    err << '\n';
  });
  const std::string csv = emit_bench_csv(rows);
  if (a.out.empty()) {
    out << csv;
  } else {
    write_file(a.out, csv);
  }
  return kExitOk;
}

struct GradcheckArgs {
  std::string problem;
  std::string data;
  int points = 10;
  std::uint64_t seed = 1;
  std::optional<double> eps;  // unset: gradient_check_steps()
  std::size_t p = 0;
};

int cmd_gradcheck(const GradcheckArgs& a, std::ostream& out) {
  ProblemArgs pa;
  pa.p = a.p;
  const ProblemSpec* spec = find_problem(a.problem);
  if (!spec) throw ConfigError("unknown problem '" + a.problem + "'");
  if (!a.data.empty()) {
    pa.data = load_dataset(a.data);
  } else if (spec->needs_data) {
    pa.data = gen_normal_dataset(1000, 5.0, 2.0, a.seed);
  }
  if (a.points < 1) throw ConfigError("--points must be >= 1");
  const Problem pr = make_problem(a.problem, pa);
  if (!pr.gradient) {
    out << pr.name << ": no analytic gradient to check\n";
    return kExitOk;
  }

  std::mt19937_64 rng(a.seed);
  WorkerPool pool(1);
  int failures = 0;
  for (int k = 1; k <= a.points; ++k) {
    ParameterVector x(pr.p);
    for (std::size_t i = 0; i < pr.p; ++i) {
      std::uniform_real_distribution<double> u(pr.check_lower[i], pr.check_upper[i]);
      x[i] = u(rng);
    }
    const auto g = pr.gradient(x);
    const auto eps = a.eps ? std::vector<double>(pr.p, *a.eps) : gradient_check_steps(x);
    const Stencil st = build_stencil(x, eps, Scheme::central);
    const auto fd = assemble_gradient(evaluate_batch(pool, pr.objective, st.point_list()), st);
    double err = 0.0, gmax = 0.0;
    for (std::size_t i = 0; i < pr.p; ++i) {
      err = std::max(err, std::abs(fd.gradient[i] - g[i]));
      gmax = std::max(gmax, std::abs(g[i]));
    }
    const double tol = std::max(1e-6, 1e-4 * gmax);
    const bool ok = err <= tol;
    if (!ok) ++failures;
    out << "point " << k << ": x=(" << join(x, ", ") << ") max_abs_err=" << err << " tol=" << tol
        << (ok ? " ok" : " FAIL") << '\n';
  }
  out << pr.name << ": " << (a.points - failures) << "/" << a.points << " points agree\n";
  return failures == 0 ? kExitOk : kExitFailure;
}

struct GendataArgs {
  std::size_t n = 1000;
  double mean = 5.0;
  double sd = 2.0;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_gendata(const GendataArgs& a, std::ostream& out) {
  const auto xs = gen_normal_dataset(a.n, a.mean, a.sd, a.seed);
  std::string text = "# N(" + shortest(a.mean) + ", " + shortest(a.sd) + "^2), n=" +
                     std::to_string(a.n) + ", mt19937_64 seed " + std::to_string(a.seed) + "\n";
  for (double v : xs) text += shortest(v) + '\n';
  if (a.out.empty()) {
    out << text;
  } else {
    write_file(a.out, text);
  }
  return kExitOk;
}

int cmd_problems(std::ostream& out) {
  for (const auto& spec : problem_registry()) {
    out << spec.name << "\tp=" << (spec.p ? std::to_string(spec.p) : std::string("any")) << '\t'
        << spec.description << '\n';
  }
  return kExitOk;
}

}  // namespace

std::vector<double> parse_real_list(std::string_view text) {
  std::vector<double> out;
  std::size_t start = 0;
  for (;;) {
    auto end = text.find(',', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view tok = text.substr(start, end - start);
    while (!tok.empty() && (tok.front() == ' ' || tok.front() == '\t')) tok.remove_prefix(1);
    while (!tok.empty() && (tok.back() == ' ' || tok.back() == '\t')) tok.remove_suffix(1);
    if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (tok.empty() || ec != std::errc{} || ptr != tok.data() + tok.size() || std::isnan(v)) {
      throw ConfigError("not a number: '" + std::string(text.substr(start, end - start)) + "'");
    }
    out.push_back(v);
    if (end == text.size()) break;
    start = end + 1;
  }
  return out;
}

std::string result_report(const OptimResult& r, bool json) {
  if (json) {
    nlohmann::ordered_json j;
    j["par"] = r.par;
    j["value"] = r.value;
    j["convergence"] = static_cast<int>(r.convergence);
    j["status"] = to_string(r.convergence);
    j["message"] = r.message;
    j["iterations"] = r.iterations;
    j["fn_calls"] = r.counts.fn_calls;
    j["gr_calls"] = r.counts.gr_calls;
    j["batches"] = r.counts.batches;
    j["elapsed"] = r.elapsed_seconds;
    return j.dump() + "\n";
  }
  std::ostringstream os;
  os << "par: " << join(r.par, " ") << '\n'
     << "value: " << shortest(r.value) << '\n'
     << "convergence: " << static_cast<int>(r.convergence) << " (" << to_string(r.convergence)
     << ")\n"
     << "message: " << r.message << '\n'
     << "iterations: " << r.iterations << '\n'
     << "fn_calls: " << r.counts.fn_calls << '\n'
     << "gr_calls: " << r.counts.gr_calls << '\n'
     << "batches: " << r.counts.batches << '\n'
     << "elapsed: " << r.elapsed_seconds << " s\n";
  return os.str();
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"paropt: L-BFGS-B, BFGS and CG with parallel objective/gradient evaluation",
               "paropt"};
  app.require_subcommand(1);

  OptimizeArgs oa;
  auto* opt = app.add_subcommand("optimize", "minimize a registered problem");
  opt->add_option("--problem", oa.problem, "problem name (see `paropt problems`)")->required();
  opt->add_option("--data", oa.data, "dataset file, one number per line");
  opt->add_option("--par0", oa.par0, "starting parameters, comma-separated");
  opt->add_option("--method", oa.method, "lbfgsb | bfgs | cg")->capture_default_str();
  opt->add_option("--lower", oa.lower, "lower bounds (lbfgsb), inf/-inf allowed");
  opt->add_option("--upper", oa.upper, "upper bounds (lbfgsb), inf/-inf allowed");
  opt->add_option("--eps", oa.eps, "finite-difference steps, one or per coordinate");
  opt->add_option("--scheme", oa.scheme, "central | forward")->capture_default_str();
  opt->add_option("--maxit", oa.maxit, "iteration limit")->capture_default_str();
  opt->add_option("--workers", oa.workers, "evaluation slots (default $PAROPT_WORKERS or #cores)");
  opt->add_flag("--loginfo", oa.loginfo, "record the optimization path");
  opt->add_option("--log-out", oa.log_out, "write the path as CSV (implies --loginfo)");
  opt->add_flag("--json", oa.json, "print the result as a flat JSON object");
  opt->add_option("--sleep", oa.sleep_s, "seconds per fn/gr call for the sleep problem");

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "time L-BFGS-B iterations, serial vs parallel");
  bench->add_option("--dims", ba.dims, "dimensions, comma-separated (default 1,2,3)");
  bench->add_option("--sleeps", ba.sleeps, "seconds per call (default 0,0.05,0.2,0.4,0.6,0.8,1)");
  bench->add_option("--modes", ba.modes, "subset of serial_analytic,serial_approx,"
                                         "parallel_analytic,parallel_approx,parallel_forward");
  bench->add_option("--reps", ba.reps, "repetitions per cell")->capture_default_str();
  bench->add_option("--iters", ba.iters, "iteration budget per run")->capture_default_str();
  bench->add_option("--workers", ba.workers, "pool size for parallel modes (default 7)");
  bench->add_option("--out", ba.out, "CSV output path (default stdout)");

  GradcheckArgs ga;
  auto* gc = app.add_subcommand("gradcheck", "compare analytic and central-difference gradients");
  gc->add_option("--problem", ga.problem, "problem name")->required();
  gc->add_option("--points", ga.points, "number of random points")->capture_default_str();
  gc->add_option("--seed", ga.seed, "seed for points (and generated data)")->capture_default_str();
  gc->add_option("--data", ga.data, "dataset file for data-driven problems");
  gc->add_option("--eps", ga.eps, "finite-difference step (default cbrt(eps_mach) * max(1, |x|))");
  gc->add_option("--p", ga.p, "dimension for problems of any dimension");

  GendataArgs da;
  auto* gd = app.add_subcommand("gendata", "write a seeded normal sample, one value per line");
  gd->add_option("--n", da.n, "sample size")->capture_default_str();
  gd->add_option("--mean", da.mean, "mean")->capture_default_str();
  gd->add_option("--sd", da.sd, "standard deviation")->capture_default_str();
  gd->add_option("--seed", da.seed, "seed")->capture_default_str();
  gd->add_option("--out", da.out, "output path (default stdout)");

  auto* probs = app.add_subcommand("problems", "list registered problems");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << "paropt: " << e.what() << '\n' << "run `paropt --help` for usage\n";
    return kExitUsage;
  }

  try {
    if (opt->parsed()) return cmd_optimize(oa, out);
    if (bench->parsed()) return cmd_bench(ba, out, err);
    if (gc->parsed()) return cmd_gradcheck(ga, out);
    if (gd->parsed()) return cmd_gendata(da, out);
    if (probs->parsed()) return cmd_problems(out);
  } catch (const InitializationError& e) {
    err << "paropt: " << e.what() << '\n';
    return kExitFailure;
  } catch (const NonFiniteError& e) {
    err << "paropt: " << e.what() << '\n';
    return kExitFailure;
  } catch (const Error& e) {
    err << "paropt: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace paropt::cli
