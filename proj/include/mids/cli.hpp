#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mids::cli {

inline constexpr const char* kToolVersion = "0.1.0";

/// Process exit codes shared by all subcommands.
enum ExitCode : int {
    kSuccess = 0,
    kValidationFailure = 2,
    kNotConvergent = 3,
    kSolverNotConverged = 4,
};

/// Entry point of the `mids` tool; `out` receives primary output when no --out file is
/// given, `err` receives diagnostics.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// SHA-256 of a byte string, lowercase hex.
[[nodiscard]] std::string sha256_hex(const std::string& bytes);

}  // namespace mids::cli
