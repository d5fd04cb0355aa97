#pragma once

#include <string>
#include <vector>

namespace riemspline {

/// Command-line entry point, callable in-process for tests. Exit codes:
/// 0 success, 1 check-suite failure, 2 parse error, 3 solver non-convergence,
/// 4 I/O error.
int run_cli(const std::vector<std::string>& args);

/// The built-in invariant suite behind `riemspline check`; returns the number
/// of failed checks and prints one line per check.
int run_check_suite();

}  // namespace riemspline
