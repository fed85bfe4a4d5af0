#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace paropt {

/// Ordered list of p finite real parameters; the optimizer state.
using ParameterVector = std::vector<double>;

/// Objective fn: R^p -> R. Must be safe to call concurrently on distinct inputs.
using Objective = std::function<double(std::span<const double>)>;

/// Analytic gradient gr: R^p -> R^p. Same purity contract as Objective.
using Gradient = std::function<std::vector<double>(std::span<const double>)>;

// Errors ---------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid options, step sizes, bounds or other user-supplied configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A parameter vector whose length does not match the problem dimension.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A point lies outside the box constraints.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The box is too narrow in some coordinate to place any nonzero step.
class DegenerateBoundsError : public Error {
 public:
  DegenerateBoundsError(std::size_t coordinate, const std::string& what)
      : Error(what), coordinate_(coordinate) {}
  std::size_t coordinate() const noexcept { return coordinate_; }

 private:
  std::size_t coordinate_;
};

/// The objective (or an analytic gradient entry) came back NaN or infinite.
class NonFiniteError : public Error {
 public:
  NonFiniteError(ParameterVector point, std::size_t index, const std::string& what)
      : Error(what), point_(std::move(point)), index_(index) {}

  /// Parameters at which the non-finite result was produced.
  const ParameterVector& point() const noexcept { return point_; }
  /// Position of the offending point in its batch (submission order).
  std::size_t index() const noexcept { return index_; }

 private:
  ParameterVector point_;
  std::size_t index_;
};

/// Non-finite objective at the starting parameters of an optimization.
class InitializationError : public Error {
 public:
  using Error::Error;
};

/// Caller broke a documented precondition (e.g. non-descent direction).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Box constraints ------------------------------------------------------------

/// Elementwise box [lower, upper]. Infinite entries mean unbounded.
struct Bounds {
  std::vector<double> lower;
  std::vector<double> upper;

  /// Unbounded box of dimension p.
  static Bounds unbounded(std::size_t p);

  std::size_t size() const noexcept { return lower.size(); }

  /// Throws ConfigError on length mismatch, NaN entries or lower_i > upper_i.
  void validate(std::size_t p) const;

  bool contains(std::span<const double> x) const noexcept;

  /// Clamp x into the box in place.
  void project(std::span<double> x) const noexcept;
};

/// Throws DimensionError unless all entries are finite and the length is p.
void require_finite_vector(std::span<const double> x, std::size_t p, const char* what);

std::string format_vector(std::span<const double> x);

}  // namespace paropt
