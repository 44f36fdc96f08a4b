#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace kprnn::cli {

enum ExitCode : int {
    kSuccess = 0,
    kUsageError = 1,
    kDataError = 2,
    kNumericalError = 3,
};

/// Runs one subcommand. Errors go to `err` as a single `error: ...` line.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kprnn::cli
