#pragma once

// Gradient-based minimizers: L-BFGS-B, BFGS and Fletcher-Reeves CG.
//
// Every objective/gradient query goes through a CoupledEvaluator, so each
// line-search trial costs exactly one parallel batch. The bound-constrained
// method is a projected-gradient L-BFGS. Variables sitting on a bound with
// the gradient pushing outward are held fixed while the two-loop recursion
// runs on the rest. The strong-Wolfe line search stops at the first point
// where the step would leave the box. It is
// not a port of the Byrd-Lu-Nocedal-Zhu Fortran code (no generalized Cauchy
// point or subspace minimization), so iteration counts differ from the
// reference implementation; minima and stopping rules match.

#include <deque>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "paropt/evaluator.hpp"
#include "paropt/iteration_log.hpp"
#include "paropt/parallel_engine.hpp"
#include "paropt/types.hpp"

namespace paropt {

enum class Method { lbfgsb, bfgs, cg };

/// Termination codes. 0 and 1 are the conventional converged/maxit pair.
enum class Convergence : int {
  converged = 0,
  maxit_reached = 1,
  line_search_failure = 52,
  degenerate = 53,
};

const char* to_string(Method m) noexcept;
const char* to_string(Convergence c) noexcept;
/// Accepts "lbfgsb", "L-BFGS-B", "bfgs", "BFGS", "cg", "CG".
std::optional<Method> parse_method(std::string_view name) noexcept;

struct OptimOptions {
  Method method = Method::lbfgsb;
  /// Box constraints, honoured by lbfgsb only. Empty means unbounded.
  std::vector<double> lower;
  std::vector<double> upper;
  int maxit = 100;
  int memory_m = 5;
  double factr = 1e7;
  double pgtol = 0.0;
  double reltol = 1.4901161193847656e-08;  // sqrt(DBL_EPSILON)
  /// Finite-difference steps: empty = default for every coordinate, one
  /// entry = broadcast, otherwise one per coordinate.
  std::vector<double> eps;
  Scheme scheme = Scheme::central;
  std::size_t workers = 1;
  bool loginfo = false;
};

struct OptimResult {
  ParameterVector par;
  double value = 0.0;
  EvalCounts counts;
  Convergence convergence = Convergence::converged;
  std::string message;
  int iterations = 0;  // accepted steps
  double elapsed_seconds = 0.0;
  std::optional<IterationLog> log;
};

/// Minimizes `objective` from `par0`. A null `gradient` selects finite
/// differences per `options.scheme`. When `pool` is null a pool of
/// `options.workers` slots is created for the run.
///
/// Throws ConfigError for invalid options, DomainError when par0 violates
/// the bounds and InitializationError when the objective is not finite at
/// par0. Line-search failures are reported through `convergence`.
OptimResult optimize(const Objective& objective, const Gradient& gradient,
                     std::span<const double> par0, const OptimOptions& options,
                     WorkerPool* pool = nullptr);

// Building blocks, exposed for testing -------------------------------------

struct CorrectionPair {
  std::vector<double> s;  // x_{k+1} - x_k
  std::vector<double> y;  // g_{k+1} - g_k
};

/// Bounded history of correction pairs; pairs with s'y <= eps_mach * y'y are
/// rejected at insertion.
class LbfgsHistory {
 public:
  explicit LbfgsHistory(std::size_t memory) : memory_(memory) {}

  /// Returns false (and stores nothing) when the curvature condition fails.
  bool push(std::vector<double> s, std::vector<double> y);
  void clear() noexcept { pairs_.clear(); }

  std::span<const CorrectionPair> pairs() const noexcept { return pairs_; }
  std::size_t size() const noexcept { return pairs_.size(); }

 private:
  std::size_t memory_;
  std::vector<CorrectionPair> pairs_;  // oldest first
};

/// Two-loop recursion: returns -H g for the L-BFGS inverse-Hessian estimate.
///
/// With `free_mask` non-empty, entries with mask 0 are treated as fixed: they
/// are removed from g and from every pair, and come back as 0 in the result.
/// The initial matrix is gamma*I with gamma = s'y / y'y of the newest usable
/// pair, or `initial_scaling` when there is none.
std::vector<double> lbfgs_direction(std::span<const CorrectionPair> history,
                                    std::span<const double> gradient,
                                    std::span<const unsigned char> free_mask = {},
                                    double initial_scaling = 1.0);

/// Fletcher-Reeves direction -g + beta d_prev with beta = |g|^2 / |g_prev|^2.
/// Falls back to -g when there is no previous gradient or when the result is
/// not a descent direction.
std::vector<double> cg_direction(std::span<const double> gradient,
                                 std::span<const double> previous_gradient,
                                 std::span<const double> previous_direction);

struct LineSearchControl {
  double c1 = 1e-4;
  double c2 = 0.9;
  double initial_step = 1.0;
  double max_step = std::numeric_limits<double>::infinity();
  int max_trials = 20;
};

struct LineSearchResult {
  bool ok = false;
  double step = 0.0;
  EvalRecord record;  // accepted point, or the best trial on failure
  int trials = 0;
};

/// Strong-Wolfe line search along `direction` from `start`.
///
/// With bounds, the step is capped where the first variable reaches its
/// bound; coordinates whose bound is reached are placed exactly on it. If
/// the cap is reached with sufficient decrease and the slope still negative
/// the capped step is accepted. Non-finite trials shrink the step.
///
/// Throws ContractViolation unless direction'g < 0 at `start`.
LineSearchResult line_search(CoupledEvaluator& evaluator, const EvalRecord& start,
                             std::span<const double> direction, const Bounds* bounds,
                             const LineSearchControl& control);

/// Largest step t with lower <= x + t d <= upper (infinity if unbounded).
double max_feasible_step(std::span<const double> x, std::span<const double> d,
                         const Bounds& bounds) noexcept;

/// Sup-norm of P(x - g) - x, the L-BFGS-B projected gradient.
double projected_gradient_norm(std::span<const double> x, std::span<const double> g,
                               const Bounds* bounds) noexcept;

}  // namespace paropt
