#include "paropt/evaluator.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <string>

namespace paropt {

GradientMode GradientMode::analytic(Gradient g) {
  if (!g) throw ConfigError("analytic gradient mode needs a callable");
  GradientMode m(Scheme::central);
  m.gradient_ = std::move(g);
  return m;
}

CoupledEvaluator::CoupledEvaluator(Objective objective, GradientMode mode,
                                   std::optional<Bounds> bounds, std::vector<double> eps,
                                   WorkerPool& pool)
    : objective_(std::move(objective)),
      mode_(std::move(mode)),
      bounds_(std::move(bounds)),
      eps_(std::move(eps)),
      pool_(&pool) {
  if (!objective_) throw ConfigError("objective callable is empty");
  if (eps_.empty()) throw ConfigError("step vector is empty; dimension must be at least 1");
  for (std::size_t i = 0; i < eps_.size(); ++i) {
    if (!(eps_[i] > 0.0) || !std::isfinite(eps_[i])) {
      throw ConfigError("finite-difference step " + std::to_string(i + 1) +
                        " must be positive and finite");
    }
  }
  if (bounds_) bounds_->validate(eps_.size());
}

bool CoupledEvaluator::cache_hit(std::span<const double> par) const noexcept {
  if (!cache_) return false;
  const auto& last = cache_->par;
  for (std::size_t i = 0; i < par.size(); ++i) {
    if (std::bit_cast<std::uint64_t>(par[i]) != std::bit_cast<std::uint64_t>(last[i])) return false;
  }
  return true;
}

const EvalRecord& CoupledEvaluator::evaluate(std::span<const double> par) {
  if (par.size() != dimension()) {
    throw DimensionError("parameter vector has length " + std::to_string(par.size()) +
                         ", evaluator dimension is " + std::to_string(dimension()));
  }
  if (cache_hit(par)) return *cache_;

  // A failed batch must not leave a stale record that could be mistaken for this point.
  cache_.reset();
  ValueAndGradient vg;
  if (mode_.is_analytic()) {
    ++counts_.batches;
    ++counts_.fn_calls;
    ++counts_.gr_calls;
    vg = parallel_value_and_gradient(*pool_, objective_, mode_.gradient(), par);
  } else {
    const Stencil st = build_stencil(par, eps_, mode_.scheme(), bounds_ ? &*bounds_ : nullptr);
    const auto points = st.point_list();
    ++counts_.batches;
    counts_.fn_calls += points.size();
    const auto values = evaluate_batch(*pool_, objective_, points);
    vg = assemble_gradient(values, st);
  }
  cache_ = EvalRecord{ParameterVector(par.begin(), par.end()), vg.value, std::move(vg.gradient)};
  return *cache_;
}

double CoupledEvaluator::value(std::span<const double> par) { return evaluate(par).value; }

std::vector<double> CoupledEvaluator::gradient(std::span<const double> par) {
  return evaluate(par).gradient;
}

}  // namespace paropt
