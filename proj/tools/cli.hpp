#pragma once

#include <iosfwd>

namespace cornerfem::cli {

/// Process exit codes.
enum ExitCode : int {
  exit_ok = 0,
  exit_audit_failed = 1,
  exit_config_error = 2,
  exit_io_error = 3,
  exit_solver_error = 4,
};

/// Entry point of the `cornerfem` tool; diagnostics go to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cornerfem::cli
