#include "paropt/parallel_engine.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

namespace paropt {

std::vector<ParameterVector> Stencil::point_list() const {
  std::vector<ParameterVector> out;
  out.reserve(points.size());
  for (const auto& sp : points) out.push_back(sp.point);
  return out;
}

Stencil build_stencil(std::span<const double> center, std::span<const double> eps, Scheme scheme,
                      const Bounds* bounds) {
  const std::size_t p = center.size();
  if (eps.size() != p) {
    throw DimensionError("step vector has length " + std::to_string(eps.size()) + ", expected " +
                         std::to_string(p));
  }
  for (std::size_t i = 0; i < p; ++i) {
    if (!(eps[i] > 0.0) || !std::isfinite(eps[i])) {
      throw ConfigError("finite-difference step " + std::to_string(i + 1) +
                        " must be positive and finite");
    }
  }
  if (bounds) {
    bounds->validate(p);
    if (!bounds->contains(center)) {
      throw DomainError("stencil center " + format_vector(center) + " lies outside the bounds");
    }
  }

  Stencil st;
  st.center.assign(center.begin(), center.end());
  st.scheme = scheme;
  st.effective_steps.resize(p);
  st.points.push_back(StencilPoint{st.center, StencilRole::center, 0, 0.0, 1.0});

  constexpr double inf = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < p; ++i) {
    const double x = center[i];
    const double lo = bounds ? bounds->lower[i] : -inf;
    const double hi = bounds ? bounds->upper[i] : inf;

    // Candidate coordinates of the shifted points; clamped ones sit exactly on the bound.
    double up = x + eps[i];
    double down = x - eps[i];
    if (up > hi) up = hi;
    if (down < lo) down = lo;
    double h_plus = up - x;
    double h_minus = x - down;
    if (up == x) h_plus = 0.0;
    if (down == x) h_minus = 0.0;
    // Interior points keep the nominal step so the denominator is exactly 2*eps (or eps).
    if (up == x + eps[i]) h_plus = eps[i];
    if (down == x - eps[i]) h_minus = eps[i];

    if (scheme == Scheme::forward) {
      if (h_plus > 0.0) {
        h_minus = 0.0;
      }
      // else: no room above, fall back to the backward quotient.
    }
    if (h_plus + h_minus <= 0.0) {
      throw DegenerateBoundsError(i, "coordinate " + std::to_string(i + 1) +
                                         " has no room for a finite-difference step");
    }
    st.effective_steps[i] = StepPair{h_plus, h_minus};
    const double den = h_plus + h_minus;
    if (h_plus > 0.0) {
      ParameterVector pt = st.center;
      pt[i] = up;
      st.points.push_back(StencilPoint{std::move(pt), StencilRole::plus, i, 1.0, den});
    }
    if (h_minus > 0.0) {
      ParameterVector pt = st.center;
      pt[i] = down;
      st.points.push_back(StencilPoint{std::move(pt), StencilRole::minus, i, -1.0, den});
    }
  }
  return st;
}

std::vector<double> evaluate_batch(WorkerPool& pool, const Objective& objective,
                                   std::span<const ParameterVector> points) {
  if (!points.empty()) {
    const std::size_t p = points.front().size();
    for (const auto& pt : points) {
      if (pt.size() != p) throw DimensionError("batch points have unequal dimensions");
    }
  }
  std::vector<double> values(points.size(), 0.0);
  std::vector<std::function<void()>> tasks;
  tasks.reserve(points.size());
  for (std::size_t k = 0; k < points.size(); ++k) {
    tasks.emplace_back([&, k] { values[k] = objective(points[k]); });
  }
  pool.run_batch(tasks);

  for (std::size_t k = 0; k < values.size(); ++k) {
    if (!std::isfinite(values[k])) {
      throw NonFiniteError(points[k], k,
                           "objective is not finite at " + format_vector(points[k]) +
                               " (batch position " + std::to_string(k) + ")");
    }
  }
  return values;
}

ValueAndGradient assemble_gradient(std::span<const double> values, const Stencil& stencil) {
  if (values.size() != stencil.points.size()) {
    throw std::logic_error("assemble_gradient: " + std::to_string(values.size()) +
                           " values for " + std::to_string(stencil.points.size()) +
                           " stencil points");
  }
  const std::size_t p = stencil.center.size();
  const double f0 = values[0];
  // Each side defaults to the center value; a present point overrides it.
  std::vector<double> f_plus(p, f0);
  std::vector<double> f_minus(p, f0);
  for (std::size_t k = 1; k < values.size(); ++k) {
    const auto& sp = stencil.points[k];
    if (sp.role == StencilRole::plus) {
      f_plus[sp.coordinate] = values[k];
    } else if (sp.role == StencilRole::minus) {
      f_minus[sp.coordinate] = values[k];
    }
  }
  ValueAndGradient out;
  out.value = f0;
  out.gradient.resize(p);
  for (std::size_t i = 0; i < p; ++i) {
    const auto& h = stencil.effective_steps[i];
    out.gradient[i] = (f_plus[i] - f_minus[i]) / (h.plus + h.minus);
  }
  return out;
}

ValueAndGradient parallel_value_and_gradient(WorkerPool& pool, const Objective& objective,
                                             const Gradient& gradient,
                                             std::span<const double> par) {
  ValueAndGradient out;
  const std::function<void()> tasks[2] = {
      [&] { out.value = objective(par); },
      [&] { out.gradient = gradient(par); },
  };
  pool.run_batch(tasks);

  ParameterVector point(par.begin(), par.end());
  if (!std::isfinite(out.value)) {
    throw NonFiniteError(point, 0, "objective is not finite at " + format_vector(par));
  }
  if (out.gradient.size() != par.size()) {
    throw DimensionError("analytic gradient returned " + std::to_string(out.gradient.size()) +
                         " entries, expected " + std::to_string(par.size()));
  }
  for (double g : out.gradient) {
    if (!std::isfinite(g)) {
      throw NonFiniteError(point, 1, "gradient is not finite at " + format_vector(par));
    }
  }
  return out;
}

std::vector<double> gradient_check_steps(std::span<const double> x) {
  const double h = std::cbrt(std::numeric_limits<double>::epsilon());
  std::vector<double> steps(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) steps[i] = h * std::max(1.0, std::abs(x[i]));
  return steps;
}

}  // namespace paropt
