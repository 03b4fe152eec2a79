#ifndef LIODMD_TOOLS_CLI_HPP
#define LIODMD_TOOLS_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace liodmd::cli {

enum ExitCode : int {
  kSuccess = 0,
  kFailure = 1,
  kUsage = 2,
  kFormat = 3,
  kDegenerate = 4,
};

/// Runs one command. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace liodmd::cli

#endif  // LIODMD_TOOLS_CLI_HPP
