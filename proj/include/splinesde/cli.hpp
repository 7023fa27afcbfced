#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace splinesde {

/// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

/// Entry point of `splinesde simulate|fit|evaluate|score`. Reports to `out`
/// and `err` and returns the exit code instead of exiting.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace splinesde
