#include "paropt/problems.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <memory>
#include <numbers>
#include <random>
#include <sstream>

#include "paropt/bench.hpp"

namespace paropt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

Problem quadratic_problem(std::size_t p) {
  if (p == 0) throw ConfigError("quadratic needs p >= 1");
  Problem pr;
  pr.name = "quadratic";
  pr.p = p;
  pr.objective = [](std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return s;
  };
  pr.gradient = [](std::span<const double> x) {
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) g[i] = 2.0 * x[i];
    return g;
  };
  pr.default_par0.assign(p, 1.0);
  pr.check_lower.assign(p, -10.0);
  pr.check_upper.assign(p, 10.0);
  return pr;
}

Problem rosenbrock_problem() {
  Problem pr;
  pr.name = "rosenbrock";
  pr.p = 2;
  pr.objective = [](std::span<const double> x) {
    const double a = x[1] - x[0] * x[0];
    const double b = 1.0 - x[0];
    return 100.0 * a * a + b * b;
  };
  pr.gradient = [](std::span<const double> x) {
    const double a = x[1] - x[0] * x[0];
    return std::vector<double>{-400.0 * x[0] * a - 2.0 * (1.0 - x[0]), 200.0 * a};
  };
  pr.default_par0 = {-1.2, 1.0};
  pr.check_lower = {-2.0, -1.0};
  pr.check_upper = {2.0, 3.0};
  return pr;
}

Problem normal_negll_problem(std::vector<double> data) {
  if (data.empty()) throw ConfigError("normal_negll needs a non-empty dataset");
  auto x = std::make_shared<const std::vector<double>>(std::move(data));
  const double n = static_cast<double>(x->size());
  const double half_log_2pi = 0.5 * std::log(2.0 * std::numbers::pi);

  Problem pr;
  pr.name = "normal_negll";
  pr.p = 2;
  pr.objective = [x, n, half_log_2pi](std::span<const double> par) {
    const double mu = par[0];
    const double sigma = par[1];
    if (!(sigma > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    double ss = 0.0;
    for (double v : *x) ss += (v - mu) * (v - mu);
    return n * (std::log(sigma) + half_log_2pi) + ss / (2.0 * sigma * sigma);
  };
  pr.gradient = [x, n](std::span<const double> par) {
    const double mu = par[0];
    const double sigma = par[1];
    double s1 = 0.0, ss = 0.0;
    for (double v : *x) {
      s1 += v - mu;
      ss += (v - mu) * (v - mu);
    }
    const double s2 = sigma * sigma;
    return std::vector<double>{-s1 / s2, n / sigma - ss / (s2 * sigma)};
  };
  pr.lower = {-kInf, 1e-4};
  pr.upper = {kInf, kInf};
  pr.default_par0 = {1.0, 1.0};
  pr.check_lower = {3.0, 1.0};
  pr.check_upper = {7.0, 3.0};
  return pr;
}

std::pair<double, double> normal_mle(std::span<const double> data) {
  const double n = static_cast<double>(data.size());
  double mean = 0.0;
  for (double v : data) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : data) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / n)};
}

const std::vector<ProblemSpec>& problem_registry() {
  static const std::vector<ProblemSpec> registry = {
      {"quadratic", "sum of squares, any dimension (p taken from par0)", 0, false,
       [](const ProblemArgs& a) { return quadratic_problem(a.p == 0 ? 2 : a.p); }},
      {"rosenbrock", "2-D Rosenbrock banana function", 2, false,
       [](const ProblemArgs&) { return rosenbrock_problem(); }},
      {"normal_negll", "normal negative log-likelihood in (mu, sigma), needs --data", 2, true,
       [](const ProblemArgs& a) { return normal_negll_problem(*a.data); }},
      {"sleep", "sum of squares that sleeps before each fn/gr call, any dimension", 0, false,
       [](const ProblemArgs& a) { return sleep_problem(a.p == 0 ? 1 : a.p, a.sleep_s); }},
  };
  return registry;
}

const ProblemSpec* find_problem(std::string_view name) noexcept {
  for (const auto& spec : problem_registry()) {
    if (spec.name == name) return &spec;
  }
  return nullptr;
}

Problem make_problem(std::string_view name, const ProblemArgs& args) {
  const ProblemSpec* spec = find_problem(name);
  if (!spec) throw ConfigError("unknown problem '" + std::string(name) + "'");
  if (spec->needs_data && !args.data) {
    throw ConfigError("problem '" + spec->name + "' needs a dataset");
  }
  if (spec->p != 0 && args.p != 0 && args.p != spec->p) {
    throw ConfigError("problem '" + spec->name + "' has dimension " + std::to_string(spec->p) +
                      ", got " + std::to_string(args.p));
  }
  return spec->make(args);
}

std::vector<double> parse_dataset(std::string_view text) {
  std::vector<double> out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;

    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    line = line.substr(first, last - first + 1);

    double v = 0.0;
    const char* b = line.data();
    if (*b == '+') ++b;
    auto [ptr, ec] = std::from_chars(b, line.data() + line.size(), v);
    if (ec != std::errc{} || ptr != line.data() + line.size() || !std::isfinite(v)) {
      throw ConfigError("dataset line " + std::to_string(line_no) + ": not a number: '" +
                        std::string(line) + "'");
    }
    out.push_back(v);
  }
  return out;
}

std::vector<double> load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read dataset '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw Error("error reading dataset '" + path.string() + "'");
  return parse_dataset(buf.str());
}

std::vector<double> gen_normal_dataset(std::size_t n, double mean, double sd, std::uint64_t seed) {
  if (n == 0) throw ConfigError("dataset size must be at least 1");
  if (!(sd > 0.0) || !std::isfinite(sd)) throw ConfigError("sd must be positive");
  if (!std::isfinite(mean)) throw ConfigError("mean must be finite");

  std::mt19937_64 rng(seed);
  constexpr double scale = 0x1p-53;
  std::vector<double> out;
  out.reserve(n);
  while (out.size() < n) {
    const double u1 = static_cast<double>((rng() >> 11) + 1) * scale;  // (0, 1]
    const double u2 = static_cast<double>(rng() >> 11) * scale;        // [0, 1)
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    out.push_back(mean + sd * r * std::cos(theta));
    if (out.size() < n) out.push_back(mean + sd * r * std::sin(theta));
  }
  return out;
}

}  // namespace paropt
