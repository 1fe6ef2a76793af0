#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace kakeya::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConditionFailed = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;

/// Runs one command line (arguments without the program name). Reports go to
/// --out; a one-line summary goes to `out` and diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args);

}  // namespace kakeya::cli
