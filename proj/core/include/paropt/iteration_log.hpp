#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "paropt/types.hpp"

namespace paropt {

struct LogRow {
  int iter = 0;
  ParameterVector par;
  double fn = 0.0;
  std::vector<double> gr;

  friend bool operator==(const LogRow&, const LogRow&) = default;
};

/// Optimization path: the starting point, then one row per accepted iterate.
class IterationLog {
 public:
  IterationLog() = default;
  /// Fixes the dimension up front; otherwise the first append sets it.
  explicit IterationLog(std::size_t p) : p_(p) {}

  /// Appends (iter = last + 1, par, fn, gr). Throws std::logic_error on a
  /// dimension mismatch.
  void append(std::span<const double> par, double fn, std::span<const double> gr);

  const std::vector<LogRow>& rows() const noexcept { return rows_; }
  std::size_t size() const noexcept { return rows_.size(); }
  bool empty() const noexcept { return rows_.empty(); }
  std::size_t dimension() const noexcept { return p_; }

  friend bool operator==(const IterationLog&, const IterationLog&) = default;

 private:
  std::size_t p_ = 0;
  std::vector<LogRow> rows_;
};

/// CSV with header `iter,par1..parp,fn,gr1..grp`. Numbers use the shortest
/// representation that parses back to the same double.
std::string to_csv(const IterationLog& log);

/// Inverse of to_csv. Throws ConfigError on malformed input.
IterationLog parse_log_csv(std::string_view text);

}  // namespace paropt
