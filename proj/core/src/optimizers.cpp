#include "paropt/optimizers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <numeric>

namespace paropt {

namespace {

constexpr double kEpsMach = std::numeric_limits<double>::epsilon();
constexpr double kInf = std::numeric_limits<double>::infinity();

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double norm_inf(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

std::vector<double> difference(std::span<const double> a, std::span<const double> b) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

bool all_zero(std::span<const double> a) {
  return std::all_of(a.begin(), a.end(), [](double v) { return v == 0.0; });
}

// Minimizer of the cubic interpolating (a0, f0, g0) and (a1, f1, g1); NaN if none.
double cubic_minimizer(double a0, double f0, double g0, double a1, double f1, double g1) {
  const double d1 = g0 + g1 - 3.0 * (f0 - f1) / (a0 - a1);
  const double disc = d1 * d1 - g0 * g1;
  if (!(disc >= 0.0)) return std::numeric_limits<double>::quiet_NaN();
  const double d2 = std::copysign(std::sqrt(disc), a1 - a0);
  const double den = g1 - g0 + 2.0 * d2;
  if (den == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return a1 - (a1 - a0) * (g1 + d2 - d1) / den;
}

struct Trial {
  double alpha = 0.0;
  double f = 0.0;
  double slope = 0.0;
  bool finite = false;
  EvalRecord record;
};

}  // namespace

const char* to_string(Method m) noexcept {
  switch (m) {
    case Method::lbfgsb: return "lbfgsb";
    case Method::bfgs: return "bfgs";
    case Method::cg: return "cg";
  }
  return "?";
}

const char* to_string(Convergence c) noexcept {
  switch (c) {
    case Convergence::converged: return "converged";
    case Convergence::maxit_reached: return "maxit_reached";
    case Convergence::line_search_failure: return "line_search_failure";
    case Convergence::degenerate: return "degenerate";
  }
  return "?";
}

std::optional<Method> parse_method(std::string_view name) noexcept {
  if (name == "lbfgsb" || name == "L-BFGS-B" || name == "l-bfgs-b") return Method::lbfgsb;
  if (name == "bfgs" || name == "BFGS") return Method::bfgs;
  if (name == "cg" || name == "CG") return Method::cg;
  return std::nullopt;
}

// L-BFGS pieces -------------------------------------------------------------

bool LbfgsHistory::push(std::vector<double> s, std::vector<double> y) {
  const double sy = dot(s, y);
  const double yy = dot(y, y);
  if (!(sy > kEpsMach * yy) || !std::isfinite(sy)) return false;
  if (pairs_.size() == memory_) pairs_.erase(pairs_.begin());
  pairs_.push_back(CorrectionPair{std::move(s), std::move(y)});
  return true;
}

std::vector<double> lbfgs_direction(std::span<const CorrectionPair> history,
                                    std::span<const double> gradient,
                                    std::span<const unsigned char> free_mask,
                                    double initial_scaling) {
  const std::size_t p = gradient.size();
  auto is_free = [&](std::size_t i) { return free_mask.empty() || free_mask[i] != 0; };

  std::vector<double> q(p);
  for (std::size_t i = 0; i < p; ++i) q[i] = is_free(i) ? gradient[i] : 0.0;

  // Pairs restricted to the free variables; those losing curvature are skipped.
  struct Pair {
    std::vector<double> s, y;
    double rho;
  };
  std::vector<Pair> pairs;
  pairs.reserve(history.size());
  for (const auto& h : history) {
    Pair pr{h.s, h.y, 0.0};
    for (std::size_t i = 0; i < p; ++i) {
      if (!is_free(i)) pr.s[i] = pr.y[i] = 0.0;
    }
    const double sy = dot(pr.s, pr.y);
    if (!(sy > kEpsMach * dot(pr.y, pr.y))) continue;
    pr.rho = 1.0 / sy;
    pairs.push_back(std::move(pr));
  }

  std::vector<double> alpha(pairs.size());
  for (std::size_t k = pairs.size(); k-- > 0;) {
    alpha[k] = pairs[k].rho * dot(pairs[k].s, q);
    for (std::size_t i = 0; i < p; ++i) q[i] -= alpha[k] * pairs[k].y[i];
  }
  double gamma = initial_scaling;
  if (!pairs.empty()) {
    const auto& last = pairs.back();
    gamma = dot(last.s, last.y) / dot(last.y, last.y);
  }
  for (double& v : q) v *= gamma;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const double beta = pairs[k].rho * dot(pairs[k].y, q);
    for (std::size_t i = 0; i < p; ++i) q[i] += (alpha[k] - beta) * pairs[k].s[i];
  }
  for (double& v : q) v = -v;
  for (std::size_t i = 0; i < p; ++i) {
    if (!is_free(i)) q[i] = 0.0;
  }
  return q;
}

std::vector<double> cg_direction(std::span<const double> gradient,
                                 std::span<const double> previous_gradient,
                                 std::span<const double> previous_direction) {
  std::vector<double> d(gradient.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = -gradient[i];
  if (previous_gradient.empty() || previous_direction.empty()) return d;

  const double prev = dot(previous_gradient, previous_gradient);
  if (!(prev > 0.0)) return d;
  const double beta = dot(gradient, gradient) / prev;
  std::vector<double> out(d);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += beta * previous_direction[i];
  if (!(dot(out, gradient) < 0.0)) return d;
  return out;
}

// Line search ---------------------------------------------------------------

double max_feasible_step(std::span<const double> x, std::span<const double> d,
                         const Bounds& bounds) noexcept {
  double t = kInf;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (d[i] > 0.0 && std::isfinite(bounds.upper[i])) {
      t = std::min(t, (bounds.upper[i] - x[i]) / d[i]);
    } else if (d[i] < 0.0 && std::isfinite(bounds.lower[i])) {
      t = std::min(t, (bounds.lower[i] - x[i]) / d[i]);
    }
  }
  return std::max(t, 0.0);
}

double projected_gradient_norm(std::span<const double> x, std::span<const double> g,
                               const Bounds* bounds) noexcept {
  if (!bounds) return norm_inf(g);
  double m = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double gi = g[i];
    if (gi < 0.0) {
      gi = std::max(x[i] - bounds->upper[i], gi);
    } else {
      gi = std::min(x[i] - bounds->lower[i], gi);
    }
    m = std::max(m, std::abs(gi));
  }
  return m;
}

LineSearchResult line_search(CoupledEvaluator& evaluator, const EvalRecord& start,
                             std::span<const double> direction, const Bounds* bounds,
                             const LineSearchControl& control) {
  const std::size_t p = start.par.size();
  const double f0 = start.value;
  const double slope0 = dot(start.gradient, direction);
  if (!(slope0 < 0.0)) {
    throw ContractViolation("line search needs a descent direction (d'g = " +
                            std::to_string(slope0) + ")");
  }

  double amax = control.max_step;
  if (bounds) amax = std::min(amax, max_feasible_step(start.par, direction, *bounds));

  LineSearchResult out;
  out.record = start;
  if (!(amax > 0.0)) return out;

  std::vector<double> x(p);
  auto evaluate = [&](double a) {
    ++out.trials;
    for (std::size_t i = 0; i < p; ++i) x[i] = start.par[i] + a * direction[i];
    if (bounds) {
      for (std::size_t i = 0; i < p; ++i) {
        const double d = direction[i];
        if (d > 0.0 && (bounds->upper[i] - start.par[i]) / d <= a) x[i] = bounds->upper[i];
        if (d < 0.0 && (bounds->lower[i] - start.par[i]) / d <= a) x[i] = bounds->lower[i];
      }
      bounds->project(x);
    }
    Trial t;
    t.alpha = a;
    try {
      const EvalRecord& rec = evaluator.evaluate(x);
      t.f = rec.value;
      t.slope = dot(rec.gradient, direction);
      t.finite = true;
      t.record = rec;
    } catch (const NonFiniteError&) {
      t.f = std::numeric_limits<double>::quiet_NaN();
      t.slope = std::numeric_limits<double>::quiet_NaN();
    }
    return t;
  };

  Trial best{0.0, f0, slope0, true, start};
  auto consider = [&](const Trial& t) {
    if (t.finite && t.f < best.f) best = t;
  };
  auto armijo = [&](const Trial& t) { return t.f <= f0 + control.c1 * t.alpha * slope0; };
  auto curvature = [&](const Trial& t) { return std::abs(t.slope) <= -control.c2 * slope0; };
  auto accept = [&](Trial& t) {
    out.ok = true;
    out.step = t.alpha;
    out.record = std::move(t.record);
    return out;
  };

  Trial lo = best;
  Trial hi;
  bool bracketed = false;
  double alpha = std::min(control.initial_step, amax);

  while (out.trials < control.max_trials) {
    if (!bracketed) {
      Trial t = evaluate(alpha);
      if (!t.finite) {
        hi = std::move(t);
        bracketed = true;
        continue;
      }
      consider(t);
      if (!armijo(t) || (lo.alpha > 0.0 && t.f >= lo.f)) {
        hi = std::move(t);
        bracketed = true;
        continue;
      }
      if (curvature(t)) return accept(t);
      if (t.slope >= 0.0) {
        hi = std::move(lo);
        lo = std::move(t);
        bracketed = true;
        continue;
      }
      if (alpha >= amax) return accept(t);
      lo = std::move(t);
      alpha = std::min(4.0 * alpha, amax);
      continue;
    }

    const double a_min = std::min(lo.alpha, hi.alpha);
    const double a_max = std::max(lo.alpha, hi.alpha);
    const double width = a_max - a_min;
    if (width <= 1e-12 * a_max) break;

    double a = std::numeric_limits<double>::quiet_NaN();
    if (hi.finite) a = cubic_minimizer(lo.alpha, lo.f, lo.slope, hi.alpha, hi.f, hi.slope);
    if (std::isnan(a)) {
      a = 0.5 * (lo.alpha + hi.alpha);
    } else {
      a = std::clamp(a, a_min + 0.1 * width, a_max - 0.1 * width);
    }

    Trial t = evaluate(a);
    if (!t.finite) {
      hi = std::move(t);
      continue;
    }
    consider(t);
    if (!armijo(t) || t.f >= lo.f) {
      hi = std::move(t);
    } else {
      if (curvature(t)) return accept(t);
      if (t.slope * (hi.alpha - lo.alpha) >= 0.0) hi = std::move(lo);
      lo = std::move(t);
    }
  }

  out.ok = false;
  out.step = best.alpha;
  out.record = std::move(best.record);
  return out;
}

// Driver --------------------------------------------------------------------

namespace {

std::vector<double> resolve_steps(const OptimOptions& o, std::size_t p) {
  if (o.eps.empty()) return std::vector<double>(p, kDefaultStep);
  if (o.eps.size() == 1) return std::vector<double>(p, o.eps.front());
  if (o.eps.size() != p) {
    throw ConfigError("eps has length " + std::to_string(o.eps.size()) + ", expected 1 or " +
                      std::to_string(p));
  }
  return o.eps;
}

std::optional<Bounds> resolve_bounds(const OptimOptions& o, std::size_t p) {
  if (o.lower.empty() && o.upper.empty()) return std::nullopt;
  Bounds b = Bounds::unbounded(p);
  auto fill = [&](const std::vector<double>& src, std::vector<double>& dst, const char* name) {
    if (src.empty()) return;
    if (src.size() == 1) {
      dst.assign(p, src.front());
    } else if (src.size() == p) {
      dst = src;
    } else {
      throw ConfigError(std::string(name) + " has length " + std::to_string(src.size()) +
                        ", expected 1 or " + std::to_string(p));
    }
  };
  fill(o.lower, b.lower, "lower");
  fill(o.upper, b.upper, "upper");
  b.validate(p);
  return b;
}

void validate(const OptimOptions& o) {
  if (o.maxit < 1) throw ConfigError("maxit must be at least 1");
  if (o.memory_m < 1) throw ConfigError("memory_m must be at least 1");
  if (!(o.factr >= 0.0)) throw ConfigError("factr must be nonnegative");
  if (!(o.pgtol >= 0.0)) throw ConfigError("pgtol must be nonnegative");
  if (!(o.reltol >= 0.0)) throw ConfigError("reltol must be nonnegative");
  if (o.workers < 1) throw ConfigError("workers must be at least 1");
}

// Dense inverse-Hessian BFGS state.
class InverseHessian {
 public:
  explicit InverseHessian(std::size_t p) : p_(p) { reset(); }

  void reset() {
    h_.assign(p_ * p_, 0.0);
    for (std::size_t i = 0; i < p_; ++i) h_[i * p_ + i] = 1.0;
    fresh_ = true;
  }

  std::vector<double> direction(std::span<const double> g) const {
    std::vector<double> d(p_, 0.0);
    for (std::size_t i = 0; i < p_; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < p_; ++j) s += h_[i * p_ + j] * g[j];
      d[i] = -s;
    }
    return d;
  }

  // H+ = (I - rho s y') H (I - rho y s') + rho s s'
  void update(std::span<const double> s, std::span<const double> y) {
    const double sy = dot(s, y);
    if (!(sy > kEpsMach * dot(y, y))) return;
    if (fresh_) {
      const double gamma = sy / dot(y, y);
      for (double& v : h_) v *= gamma;
      fresh_ = false;
    }
    const double rho = 1.0 / sy;
    std::vector<double> hy(p_, 0.0);
    for (std::size_t i = 0; i < p_; ++i) {
      for (std::size_t j = 0; j < p_; ++j) hy[i] += h_[i * p_ + j] * y[j];
    }
    const double yhy = dot(y, hy);
    for (std::size_t i = 0; i < p_; ++i) {
      for (std::size_t j = 0; j < p_; ++j) {
        h_[i * p_ + j] += -rho * (hy[i] * s[j] + s[i] * hy[j]) +
                          (rho * rho * yhy + rho) * s[i] * s[j];
      }
    }
  }

 private:
  std::size_t p_;
  std::vector<double> h_;
  bool fresh_ = true;
};

}  // namespace

OptimResult optimize(const Objective& objective, const Gradient& gradient,
                     std::span<const double> par0, const OptimOptions& options, WorkerPool* pool) {
  const auto t_start = std::chrono::steady_clock::now();
  validate(options);
  const std::size_t p = par0.size();
  if (p == 0) throw DimensionError("par0 is empty");
  require_finite_vector(par0, p, "par0");

  std::optional<Bounds> bounds = resolve_bounds(options, p);
  if (bounds && options.method != Method::lbfgsb) {
    throw ConfigError(std::string("bounds are only supported by lbfgsb, not ") +
                      to_string(options.method));
  }
  if (bounds && !bounds->contains(par0)) {
    throw DomainError("par0 " + format_vector(par0) + " lies outside the bounds");
  }
  const Bounds* box = bounds ? &*bounds : nullptr;

  std::unique_ptr<WorkerPool> own_pool;
  if (!pool) {
    own_pool = std::make_unique<WorkerPool>(options.workers);
    pool = own_pool.get();
  }

  GradientMode mode = gradient ? GradientMode::analytic(gradient)
                               : GradientMode::finite_difference(options.scheme);
  CoupledEvaluator ev(objective, std::move(mode), bounds, resolve_steps(options, p), *pool);

  EvalRecord cur;
  try {
    cur = ev.evaluate(par0);
  } catch (const NonFiniteError& e) {
    throw InitializationError(std::string("cannot start: ") + e.what());
  }

  OptimResult res;
  if (options.loginfo) {
    res.log.emplace(p);
    res.log->append(cur.par, cur.value, cur.gradient);
  }

  LbfgsHistory history(static_cast<std::size_t>(options.memory_m));
  InverseHessian hess(options.method == Method::bfgs ? p : 0);
  std::vector<double> cg_prev_g, cg_prev_d;
  double cg_prev_slope = 0.0, cg_prev_step = 0.0;
  int since_restart = 0;
  bool fresh_start = true;  // no curvature information yet

  LineSearchControl ls;
  ls.c2 = options.method == Method::cg ? 0.1 : 0.9;

  int iter = 0;
  for (;;) {
    if (projected_gradient_norm(cur.par, cur.gradient, box) <= options.pgtol) {
      res.convergence = Convergence::converged;
      res.message = "CONVERGENCE: NORM OF PROJECTED GRADIENT <= PGTOL";
      break;
    }
    if (iter >= options.maxit) {
      res.convergence = Convergence::maxit_reached;
      res.message = "maximum number of iterations reached";
      break;
    }

    std::vector<double> d;
    switch (options.method) {
      case Method::lbfgsb: {
        std::vector<unsigned char> free(p, 1);
        if (box) {
          for (std::size_t i = 0; i < p; ++i) {
            const bool at_lower = cur.par[i] <= box->lower[i] && cur.gradient[i] > 0.0;
            const bool at_upper = cur.par[i] >= box->upper[i] && cur.gradient[i] < 0.0;
            if (at_lower || at_upper) free[i] = 0;
          }
        }
        auto hold_at_bounds = [&](std::vector<double>& dir) {
          if (!box) return;
          for (std::size_t i = 0; i < p; ++i) {
            if ((cur.par[i] <= box->lower[i] && dir[i] < 0.0) ||
                (cur.par[i] >= box->upper[i] && dir[i] > 0.0)) {
              dir[i] = 0.0;
            }
          }
        };
        d = lbfgs_direction(history.pairs(), cur.gradient, free);
        hold_at_bounds(d);
        if (!(dot(d, cur.gradient) < 0.0)) {
          history.clear();
          fresh_start = true;
          d = lbfgs_direction({}, cur.gradient, free);
          hold_at_bounds(d);
        }
        break;
      }
      case Method::bfgs:
        d = hess.direction(cur.gradient);
        if (!(dot(d, cur.gradient) < 0.0)) {
          hess.reset();
          fresh_start = true;
          d = hess.direction(cur.gradient);
        }
        break;
      case Method::cg:
        if (since_restart >= static_cast<int>(p)) {
          cg_prev_g.clear();
          cg_prev_d.clear();
          since_restart = 0;
        }
        d = cg_direction(cur.gradient, cg_prev_g, cg_prev_d);
        if (cg_prev_g.empty()) fresh_start = true;
        break;
    }

    const double slope = dot(d, cur.gradient);
    if (all_zero(d) || !(slope < 0.0)) {
      res.convergence = Convergence::degenerate;
      res.message = "no descent direction available";
      break;
    }

    if (fresh_start) {
      ls.initial_step = std::min(1.0, 1.0 / norm2(d));
    } else if (options.method == Method::cg) {
      ls.initial_step = cg_prev_step * cg_prev_slope / slope;
      if (!(ls.initial_step > 0.0) || !std::isfinite(ls.initial_step)) ls.initial_step = 1.0;
    } else {
      ls.initial_step = 1.0;
    }

    LineSearchResult step = line_search(ev, cur, d, box, ls);
    if (!step.ok) {
      if (step.record.value < cur.value) {
        cur = std::move(step.record);
        ++iter;
        if (res.log) res.log->append(cur.par, cur.value, cur.gradient);
      }
      res.convergence = Convergence::line_search_failure;
      res.message = "ABNORMAL_TERMINATION_IN_LNSRCH";
      break;
    }

    const double f_old = cur.value;
    auto s = difference(step.record.par, cur.par);
    auto y = difference(step.record.gradient, cur.gradient);
    switch (options.method) {
      case Method::lbfgsb:
        history.push(std::move(s), std::move(y));
        break;
      case Method::bfgs:
        hess.update(s, y);
        break;
      case Method::cg:
        cg_prev_g = cur.gradient;
        cg_prev_d = d;
        cg_prev_slope = slope;
        cg_prev_step = step.step;
        ++since_restart;
        break;
    }
    fresh_start = false;
    cur = std::move(step.record);
    ++iter;
    if (res.log) res.log->append(cur.par, cur.value, cur.gradient);

    const double f_new = cur.value;
    if (options.method == Method::lbfgsb) {
      const double scale = std::max({std::abs(f_old), std::abs(f_new), 1.0});
      if (f_old - f_new <= options.factr * kEpsMach * scale) {
        res.convergence = Convergence::converged;
        res.message = "CONVERGENCE: REL_REDUCTION_OF_F <= FACTR*EPSMCH";
        break;
      }
    } else if (std::abs(f_old - f_new) <= options.reltol * (std::abs(f_old) + options.reltol)) {
      res.convergence = Convergence::converged;
      res.message = "relative reduction of f <= reltol";
      break;
    }
  }

  res.par = cur.par;
  res.value = cur.value;
  res.counts = ev.counts();
  res.iterations = iter;
  res.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return res;
}

}  // namespace paropt
