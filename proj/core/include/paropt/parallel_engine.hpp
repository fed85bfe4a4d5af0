#pragma once

// Finite-difference stencils and batched parallel evaluation.
//
// A gradient request at x becomes one batch: the center x plus the shifted
// points x + h+ e_i and x - h- e_i. Each coordinate's quotient is
//
//     g_i = (f(x + h+ e_i) - f(x - h- e_i)) / (h+ + h-)
//
// where a zero-length side reuses f(x). Away from bounds the central scheme
// uses h+ = h- = eps_i (1+2p points) and the forward scheme h+ = eps_i,
// h- = 0 (1+p points). Near a bound the step on that side is clamped to the
// distance to the bound, which turns the quotient one-sided when needed.

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "paropt/types.hpp"
#include "paropt/worker_pool.hpp"

namespace paropt {

enum class Scheme { central, forward };

enum class StencilRole { center, plus, minus };

struct StencilPoint {
  ParameterVector point;
  StencilRole role = StencilRole::center;
  std::size_t coordinate = 0;  // meaningless for the center
  double weight_num = 0.0;     // +1 for plus, -1 for minus, 0 for center
  double weight_den = 1.0;     // h+ + h- of the coordinate
};

struct StepPair {
  double plus = 0.0;
  double minus = 0.0;
};

struct Stencil {
  ParameterVector center;
  std::vector<StencilPoint> points;  // center first, then coordinates ascending, plus before minus
  Scheme scheme = Scheme::central;
  std::vector<StepPair> effective_steps;

  std::vector<ParameterVector> point_list() const;
};

/// Builds the evaluation stencil around `center`.
///
/// Throws ConfigError for a nonpositive or non-finite step, DomainError when
/// the center lies outside `bounds`, and DegenerateBoundsError when both
/// sides of some coordinate collapse to zero.
Stencil build_stencil(std::span<const double> center, std::span<const double> eps, Scheme scheme,
                      const Bounds* bounds = nullptr);

/// Central-difference steps that balance truncation against rounding error:
/// cbrt(DBL_EPSILON) * max(1, |x_i|). Used for gradient verification, where
/// the optimizer's default step is too coarse on strongly curved objectives.
std::vector<double> gradient_check_steps(std::span<const double> x);

/// Evaluates `objective` at every point, in parallel on `pool`, and returns
/// the values in submission order. The output does not depend on pool size.
///
/// Throws NonFiniteError for the first point (in submission order) whose
/// value is NaN or infinite. Exceptions raised by the objective propagate
/// once the batch has drained.
std::vector<double> evaluate_batch(WorkerPool& pool, const Objective& objective,
                                   std::span<const ParameterVector> points);

struct ValueAndGradient {
  double value = 0.0;
  std::vector<double> gradient;
};

/// Turns stencil values into difference quotients. The center value comes
/// back with the gradient so it can be cached as the objective value.
ValueAndGradient assemble_gradient(std::span<const double> values, const Stencil& stencil);

/// Runs objective(par) and gradient(par) as two concurrent tasks.
ValueAndGradient parallel_value_and_gradient(WorkerPool& pool, const Objective& objective,
                                             const Gradient& gradient,
                                             std::span<const double> par);

}  // namespace paropt
