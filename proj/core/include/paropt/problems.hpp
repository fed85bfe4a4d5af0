#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "paropt/types.hpp"

namespace paropt {

/// A concrete objective ready for optimize().
struct Problem {
  std::string name;
  std::size_t p = 0;
  Objective objective;
  Gradient gradient;  // empty when only finite differences are available
  std::vector<double> lower;  // default bounds, empty = unbounded
  std::vector<double> upper;
  ParameterVector default_par0;
  // Box from which gradcheck draws random points.
  std::vector<double> check_lower;
  std::vector<double> check_upper;
};

struct ProblemArgs {
  std::size_t p = 0;                  // requested dimension; 0 = problem default
  std::optional<std::vector<double>> data;
  double sleep_s = 0.0;
};

/// Registry entry.
struct ProblemSpec {
  std::string name;
  std::string description;
  std::size_t p = 0;  // fixed dimension, or 0 when any p >= 1 works
  bool needs_data = false;
  std::function<Problem(const ProblemArgs&)> make;
};

/// quadratic, rosenbrock, normal_negll, sleep (in that order).
const std::vector<ProblemSpec>& problem_registry();

const ProblemSpec* find_problem(std::string_view name) noexcept;

/// Looks up and instantiates a registered problem. Throws ConfigError for an
/// unknown name, a missing dataset or an unsupported dimension.
Problem make_problem(std::string_view name, const ProblemArgs& args);

/// f(x) = sum x_i^2, gradient 2x.
Problem quadratic_problem(std::size_t p);

/// 100 (x2 - x1^2)^2 + (1 - x1)^2.
Problem rosenbrock_problem();

/// Negative log-likelihood of N(mu, sigma^2) over `data`, parameters (mu, sigma),
/// default lower bound sigma >= 1e-4.
Problem normal_negll_problem(std::vector<double> data);

/// Closed-form maximum-likelihood estimate (sample mean, sqrt(mean squared deviation)).
std::pair<double, double> normal_mle(std::span<const double> data);

/// Newline-delimited decimal numbers; blank lines and `#` comments are skipped.
/// Throws Error on I/O failure and ConfigError naming the line of a bad token.
std::vector<double> load_dataset(const std::filesystem::path& path);
std::vector<double> parse_dataset(std::string_view text);

/// n draws from N(mean, sd^2): std::mt19937_64 seeded with `seed`, 53-bit
/// uniforms, Box-Muller transform using both outputs of each pair.
std::vector<double> gen_normal_dataset(std::size_t n, double mean, double sd, std::uint64_t seed);

}  // namespace paropt
