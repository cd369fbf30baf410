#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sgdml::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kRuntimeError = 1;
inline constexpr int kUsageError = 2;

/// Runs one `sgdml <subcommand> ...` invocation. `args` excludes the program
/// name. Reports and tables go to `out`; diagnostics and error objects to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sgdml::cli
