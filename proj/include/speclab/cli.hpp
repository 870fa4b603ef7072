#pragma once

#include <string>
#include <vector>

namespace speclab::cli {

/// Entry point behind the command-line binary.  Exit codes:
///   0 success, all audits passing
///   2 invalid configuration
///   3 numerical fault or invariant violation
///   4 audits marginal (results emitted, flagged)
int run(const std::vector<std::string>& args);

}  // namespace speclab::cli
