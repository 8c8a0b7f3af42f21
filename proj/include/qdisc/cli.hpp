#pragma once

#include <iosfwd>

namespace qdisc::cli {

/// Full command-line entry point. Writes the report to `out` (and to
/// --output if given), diagnostics to `err`. Returns the process exit code:
/// 0 success, 1 computation or validation failure, 2 input error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qdisc::cli
