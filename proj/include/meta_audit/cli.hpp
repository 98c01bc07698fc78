#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace meta_audit {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitData = 2,
  kExitNumeric = 3,
};

/// Subcommands: combine, diagnose, robustness, searchspace, simulate.
/// `args` excludes the program name. Human-readable output goes to `out`,
/// errors to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

int cli_main(int argc, char** argv);

}  // namespace meta_audit
