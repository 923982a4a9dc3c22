#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace chaosfolio::cli
{

/// Exit codes: 0 success, 1 input error, 2 computational failure.
enum ExitCode : int
{
    kSuccess = 0,
    kInputError = 1,
    kComputeError = 2,
};

/// Runs the command line `chaosfolio <args...>` (args excludes the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace chaosfolio::cli
