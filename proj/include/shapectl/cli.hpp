#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace shapectl {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitNonConvergence = 3,
  kExitAdmissibility = 4,
};

/// Runs one subcommand (simulate, sensitivity, adjoint, uc-check, control,
/// bmatrix, report). `args` excludes the program name. Errors are reported as
/// a single JSON line {"error": kind, "message": text} on `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace shapectl
