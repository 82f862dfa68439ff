#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace byzsim::app {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

/// Whole command line minus the program name. Results go to `out` unless
/// --out names a file; diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace byzsim::app
