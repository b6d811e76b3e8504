#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace wlancap::cli {

/// Exit codes of the command-line tool.
enum ExitCode : int {
    kOk = 0,
    kUsageOrInput = 1,   ///< bad flags, unreadable or malformed scenario, failed validation
    kInfeasible = 2,     ///< offered load has no stable operating point
};

/// Runs the tool with the given arguments (argv[0] excluded). Normal output
/// goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace wlancap::cli
