#include "paropt/types.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

namespace paropt {

Bounds Bounds::unbounded(std::size_t p) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  return Bounds{std::vector<double>(p, -inf), std::vector<double>(p, inf)};
}

void Bounds::validate(std::size_t p) const {
  if (lower.size() != p || upper.size() != p) {
    throw ConfigError("bounds have length " + std::to_string(lower.size()) + "/" +
                      std::to_string(upper.size()) + ", expected " + std::to_string(p));
  }
  for (std::size_t i = 0; i < p; ++i) {
    if (std::isnan(lower[i]) || std::isnan(upper[i])) {
      throw ConfigError("bound " + std::to_string(i + 1) + " is NaN");
    }
    if (lower[i] > upper[i]) {
      throw ConfigError("inverted bounds in coordinate " + std::to_string(i + 1) +
                        ": lower > upper");
    }
  }
}

bool Bounds::contains(std::span<const double> x) const noexcept {
  if (x.size() != lower.size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] >= lower[i] && x[i] <= upper[i])) return false;
  }
  return true;
}

void Bounds::project(std::span<double> x) const noexcept {
  for (std::size_t i = 0; i < x.size() && i < lower.size(); ++i) {
    x[i] = std::clamp(x[i], lower[i], upper[i]);
  }
}

void require_finite_vector(std::span<const double> x, std::size_t p, const char* what) {
  if (x.size() != p) {
    throw DimensionError(std::string(what) + " has length " + std::to_string(x.size()) +
                         ", expected " + std::to_string(p));
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i])) {
      throw ConfigError(std::string(what) + " entry " + std::to_string(i + 1) + " is not finite");
    }
  }
}

std::string format_vector(std::span<const double> x) {
  std::string out = "(";
  char buf[32];
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i) out += ", ";
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x[i]);
    out.append(buf, end);
  }
  out += ")";
  return out;
}

}  // namespace paropt
