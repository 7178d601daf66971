#ifndef RDMD_TOOLS_COMMANDS_HPP
#define RDMD_TOOLS_COMMANDS_HPP

#include <ostream>
#include <string>
#include <vector>

namespace rdmd::cli {

inline constexpr const char* kToolVersion = "0.1.0";

// Process exit codes.
enum ExitCode : int {
    kOk = 0,
    kGenericError = 1,
    kInvalidParameter = 2,
    kFormatError = 3,
    kNumericalFailure = 4,
    kPathError = 5,
    kDataError = 6,
};

/// Runs the CLI with argv-style arguments (args[0] is the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Parallelism cap from RDMD_THREADS (0 when unset).
int thread_cap_from_env();

} // namespace rdmd::cli

#endif
