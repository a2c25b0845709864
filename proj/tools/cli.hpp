#ifndef QAT_TOOLS_CLI_HPP
#define QAT_TOOLS_CLI_HPP

#include <iosfwd>

namespace qat::cli {

enum ExitCode : int { kOk = 0, kInputError = 2, kNotConverged = 3, kSolverFailure = 4 };

/// Entry point of the `qat` tool. Returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qat::cli

#endif  // QAT_TOOLS_CLI_HPP
