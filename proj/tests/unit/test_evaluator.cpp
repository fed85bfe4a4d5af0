#include <doctest.h>

#include <atomic>
#include <cmath>
#include <mutex>
#include <numeric>
#include <random>

#include "paropt/evaluator.hpp"

using namespace paropt;

namespace {

double sum_sq(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

std::vector<double> two_x(std::span<const double> x) {
  std::vector<double> g(x.begin(), x.end());
  for (double& v : g) v *= 2.0;
  return g;
}

}  // namespace

TEST_CASE("sum/product pair: value 15, gradient 120, one evaluation") {
  std::atomic<int> fn_hits{0}, gr_hits{0};
  auto sum = [&](std::span<const double> x) {
    ++fn_hits;
    return std::accumulate(x.begin(), x.end(), 0.0);
  };
  // Product broadcast as a "gradient" so both results are easy to check by hand.
  auto prod = [&](std::span<const double> x) {
    ++gr_hits;
    return std::vector<double>(x.size(), std::accumulate(x.begin(), x.end(), 1.0,
                                                         std::multiplies<>()));
  };
  WorkerPool pool(2);
  CoupledEvaluator ev(sum, GradientMode::analytic(prod), std::nullopt,
                      std::vector<double>(5, kDefaultStep), pool);
  const std::vector<double> x{1, 2, 3, 4, 5};
  CHECK(ev.value(x) == 15.0);
  CHECK(fn_hits == 1);
  CHECK(gr_hits == 1);
  CHECK(ev.gradient(x)[0] == 120.0);
  CHECK(fn_hits == 1);
  CHECK(gr_hits == 1);
  CHECK(ev.counts() == EvalCounts{1, 1, 1});
}

TEST_CASE("construction") {
  WorkerPool pool(1);
  SUBCASE("fresh evaluator has zero counts") {
    CoupledEvaluator ev(sum_sq, GradientMode::central(), std::nullopt, {1e-3, 1e-3, 1e-3}, pool);
    CHECK(ev.counts() == EvalCounts{0, 0, 0});
    CHECK_FALSE(ev.cached().has_value());
    CHECK(ev.dimension() == 3);
  }
  SUBCASE("zero step") {
    CHECK_THROWS_AS(CoupledEvaluator(sum_sq, GradientMode::central(), std::nullopt, {1e-3, 0.0}, pool),
                    ConfigError);
  }
  SUBCASE("inverted bounds") {
    Bounds b{{1.0}, {0.0}};
    CHECK_THROWS_AS(CoupledEvaluator(sum_sq, GradientMode::central(), b, {1e-3}, pool), ConfigError);
  }
}

TEST_CASE("eval_value and eval_gradient") {
  WorkerPool pool(3);
  const std::vector<double> x{3.0};
  SUBCASE("central") {
    CoupledEvaluator ev(sum_sq, GradientMode::central(), std::nullopt, {1e-3}, pool);
    CHECK(ev.value(x) == 9.0);
    CHECK(ev.gradient(x)[0] == doctest::Approx(6.0).epsilon(1e-12));
    CHECK(ev.counts().batches == 1);
    CHECK(ev.value(x) == 9.0);
    CHECK(ev.counts().batches == 1);
    CHECK(ev.counts().fn_calls == 3);
  }
  SUBCASE("forward") {
    CoupledEvaluator ev(sum_sq, GradientMode::forward(), std::nullopt, {1e-3}, pool);
    CHECK(ev.gradient(x)[0] == doctest::Approx(6.001).epsilon(1e-12));
  }
  SUBCASE("wrong length") {
    CoupledEvaluator ev(sum_sq, GradientMode::central(), std::nullopt, {1e-3}, pool);
    const std::vector<double> y{1.0, 2.0};
    CHECK_THROWS_AS(ev.value(y), DimensionError);
    CHECK_THROWS_AS(ev.gradient(y), DimensionError);
  }
}

TEST_CASE("evaluation-count laws") {
  WorkerPool pool(7);
  const std::vector<double> x{0.5, -1.0, 2.0};
  SUBCASE("central: 1+2p") {
    CoupledEvaluator ev(sum_sq, GradientMode::central(), std::nullopt, std::vector<double>(3, 1e-3), pool);
    ev.value(x);
    CHECK(ev.counts().fn_calls == 7);
  }
  SUBCASE("forward: 1+p") {
    CoupledEvaluator ev(sum_sq, GradientMode::forward(), std::nullopt, std::vector<double>(3, 1e-3), pool);
    ev.value(x);
    CHECK(ev.counts().fn_calls == 4);
  }
  SUBCASE("analytic: fn_calls == gr_calls == batches") {
    CoupledEvaluator ev(sum_sq, GradientMode::analytic(two_x), std::nullopt, std::vector<double>(3, 1e-3), pool);
    for (int k = 0; k < 5; ++k) {
      std::vector<double> y = x;
      y[0] += k;
      ev.value(y);
      ev.gradient(y);
    }
    CHECK(ev.counts() == EvalCounts{5, 5, 5});
  }
}

TEST_CASE("property: single flight in either query order") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n01;
  WorkerPool pool(4);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t p = 1 + static_cast<std::size_t>(trial % 4);
    std::vector<double> x(p);
    for (double& v : x) v = n01(rng);
    for (bool analytic : {false, true}) {
      auto mode = analytic ? GradientMode::analytic(two_x) : GradientMode::central();
      CoupledEvaluator a(sum_sq, mode, std::nullopt, std::vector<double>(p, 1e-3), pool);
      CoupledEvaluator b(sum_sq, mode, std::nullopt, std::vector<double>(p, 1e-3), pool);
      const double va = a.value(x);
      const auto ga = a.gradient(x);
      const auto gb = b.gradient(x);
      const double vb = b.value(x);
      CHECK(a.counts().batches == 1);
      CHECK(b.counts().batches == 1);
      CHECK(va == vb);
      CHECK(ga == gb);
    }
  }
}

TEST_CASE("cache is keyed on bitwise equality and holds one entry") {
  WorkerPool pool(1);
  CoupledEvaluator ev(sum_sq, GradientMode::analytic(two_x), std::nullopt, {1e-3}, pool);
  const std::vector<double> x{1.0}, y{std::nextafter(1.0, 2.0)};
  ev.value(x);
  ev.value(y);
  ev.value(x);
  CHECK(ev.counts().batches == 3);

  const std::vector<double> pz{0.0}, nz{-0.0};
  ev.value(pz);
  ev.value(nz);
  CHECK(ev.counts().batches == 5);
}

TEST_CASE("non-finite objective is an error and is not cached") {
  WorkerPool pool(2);
  std::atomic<int> calls{0};
  auto log_of = [&calls](std::span<const double> x) {
    ++calls;
    return std::log(x[0]);
  };
  CoupledEvaluator ev(log_of, GradientMode::central(), std::nullopt, {1e-3}, pool);
  const std::vector<double> bad{-1.0};
  CHECK_THROWS_AS(ev.value(bad), NonFiniteError);
  CHECK_FALSE(ev.cached().has_value());
  CHECK_THROWS_AS(ev.value(bad), NonFiniteError);
  CHECK(ev.counts().batches == 2);

  // A stencil point crossing into the invalid region is reported with its coordinates.
  const std::vector<double> edge{0.0005};
  try {
    ev.gradient(edge);
    FAIL("expected NonFiniteError");
  } catch (const NonFiniteError& e) {
    CHECK(e.point()[0] == doctest::Approx(0.0005 - 1e-3));
  }
}

TEST_CASE("bounded evaluator clamps its stencil") {
  WorkerPool pool(3);
  std::vector<ParameterVector> seen;
  std::mutex m;
  auto record = [&](std::span<const double> x) {
    std::lock_guard lock(m);
    seen.emplace_back(x.begin(), x.end());
    return sum_sq(x);
  };
  Bounds b{{0.0}, {1.0}};
  CoupledEvaluator ev(record, GradientMode::central(), b, {1e-3}, pool);
  const std::vector<double> at_upper{1.0};
  ev.gradient(at_upper);
  CHECK(ev.counts().fn_calls == 2);
  for (const auto& pt : seen) CHECK(b.contains(pt));
}

TEST_CASE("property: central-difference error shrinks like eps^2 on a smooth function") {
  // f = sum sin(x_i); third derivative bounded by 1, so |error| <= eps^2 / 6.
  auto f = [](std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += std::sin(v);
    return s;
  };
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  WorkerPool pool(4);
  for (double eps : {1e-2, 1e-3}) {
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> x{u(rng), u(rng), u(rng)};
      CoupledEvaluator ev(f, GradientMode::central(), std::nullopt, std::vector<double>(3, eps), pool);
      const auto g = ev.gradient(x);
      for (std::size_t i = 0; i < 3; ++i) {
        CHECK(std::abs(g[i] - std::cos(x[i])) <= eps * eps / 6.0 + 1e-11);
      }
    }
  }
}
