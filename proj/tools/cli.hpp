#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace scenmap::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDataError = 1;
inline constexpr int kExitUsage = 2;

/// Runs one subcommand. `args` excludes the program name. Data goes to `out`
/// or to declared files; diagnostics go to `err`, errors as one JSON line.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace scenmap::cli
