#ifndef GCPBENCH_CLI_HPP
#define GCPBENCH_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace gcpbench::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Runs one CLI invocation. Subcommands: simulate, detect, evaluate,
/// evaluate-multi, validate, diff, report.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gcpbench::cli

#endif  // GCPBENCH_CLI_HPP
