#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mht {

inline constexpr const char* kVersion = "1.0.0";

/// Exit codes of the command-line front end.
enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitNumerical = 3 };

/// Entry point for `mht simulate|eval|fit|report`. Results go to files or `out`,
/// diagnostics and usage text to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Parses `lo:hi:count` into an evenly spaced grid.
std::vector<double> parse_grid(const std::string& spec);

}  // namespace mht
