#pragma once

#include <iosfwd>

namespace fondrec::cli {

// Stable exit codes, documented in the README.
inline constexpr int kOk = 0;          // success
inline constexpr int kUsage = 1;       // bad flags or internal failure
inline constexpr int kFormula = 2;     // formula, template, or config errors
inline constexpr int kFile = 3;        // missing or malformed input files
inline constexpr int kUnsolvable = 4;  // no policy of the requested kind

// Full front end: parses argv, runs one subcommand, writes results to `out`
// and diagnostics to `err`, returns the exit code.
int run_cli(int argc, const char *const *argv, std::ostream &out,
            std::ostream &err);

}  // namespace fondrec::cli
