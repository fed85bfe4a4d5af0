#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "paropt/parallel_engine.hpp"
#include "paropt/types.hpp"
#include "paropt/worker_pool.hpp"

namespace paropt {

/// How gradients are obtained: a user callable, or finite differences.
class GradientMode {
 public:
  static GradientMode analytic(Gradient g);
  static GradientMode central() { return GradientMode(Scheme::central); }
  static GradientMode forward() { return GradientMode(Scheme::forward); }
  static GradientMode finite_difference(Scheme s) { return GradientMode(s); }

  bool is_analytic() const noexcept { return static_cast<bool>(gradient_); }
  const Gradient& gradient() const noexcept { return gradient_; }
  Scheme scheme() const noexcept { return scheme_; }

 private:
  explicit GradientMode(Scheme s) : scheme_(s) {}
  Gradient gradient_;
  Scheme scheme_ = Scheme::central;
};

struct EvalRecord {
  ParameterVector par;
  double value = 0.0;
  std::vector<double> gradient;
};

struct EvalCounts {
  std::uint64_t fn_calls = 0;  // raw objective invocations
  std::uint64_t gr_calls = 0;  // raw analytic-gradient invocations
  std::uint64_t batches = 0;   // parallel dispatches

  friend bool operator==(const EvalCounts&, const EvalCounts&) = default;
};

/// Default finite-difference step per coordinate.
inline constexpr double kDefaultStep = 1e-3;

/// Single-entry memo that couples objective and gradient evaluation.
///
/// A value or gradient query at parameters not bitwise-identical to the cached
/// ones dispatches one batch computing both and replaces the cache. A repeat
/// query at the same parameters is served from the cache without touching the
/// user functions. Non-finite results throw NonFiniteError and are not cached.
///
/// Not thread-safe; meant to be driven by one optimizer thread.
class CoupledEvaluator {
 public:
  /// Throws ConfigError for nonpositive steps, inverted bounds or mismatched lengths.
  CoupledEvaluator(Objective objective, GradientMode mode, std::optional<Bounds> bounds,
                   std::vector<double> eps, WorkerPool& pool);

  std::size_t dimension() const noexcept { return eps_.size(); }
  const std::optional<Bounds>& bounds() const noexcept { return bounds_; }

  double value(std::span<const double> par);
  std::vector<double> gradient(std::span<const double> par);

  /// Value and gradient together; the reference stays valid until the next query.
  const EvalRecord& evaluate(std::span<const double> par);

  EvalCounts counts() const noexcept { return counts_; }

  /// Most recently cached record, if any.
  const std::optional<EvalRecord>& cached() const noexcept { return cache_; }

 private:
  bool cache_hit(std::span<const double> par) const noexcept;

  Objective objective_;
  GradientMode mode_;
  std::optional<Bounds> bounds_;
  std::vector<double> eps_;
  WorkerPool* pool_;
  std::optional<EvalRecord> cache_;
  EvalCounts counts_;
};

}  // namespace paropt
