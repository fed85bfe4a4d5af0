#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "paropt/optimizers.hpp"

namespace paropt::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // optimization failed or a check did not pass
inline constexpr int kExitUsage = 2;    // bad flags, bad configuration, unreadable input

/// Entry point behind `paropt`. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Human-readable result block, or a flat JSON object when `json` is set.
std::string result_report(const OptimResult& result, bool json);

/// Comma-separated reals; `inf`, `-inf` and `+inf` are accepted, NaN is not.
std::vector<double> parse_real_list(std::string_view text);

}  // namespace paropt::cli
