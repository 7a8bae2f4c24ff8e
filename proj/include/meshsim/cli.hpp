#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace meshsim {

/// Runs the command-line tool on `args` (program name excluded). Returns
/// the process exit code: 0 on success (including help), 1 for bad
/// input — usage errors, malformed files or configs, impossible
/// requests — and 2 when a simulation stage fails at runtime.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace meshsim
