#pragma once

#include <iosfwd>
#include <string>

namespace nlft::cli {

inline constexpr const char* tool_version = "0.1.0";

enum ExitCode : int { exit_ok = 0, exit_usage = 1, exit_numerical = 2, exit_invariant = 3 };

/// Entry point of the nlft tool. Summaries go to out, diagnostics to err.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// 17 significant digits; "nan" / "inf" / "-inf" for non-finite values.
std::string format_double(double v);

}  // namespace nlft::cli
