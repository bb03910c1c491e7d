#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace uhoi::cli {

// Runs the command line with the given arguments (argv[0] excluded) and
// returns the process exit code: 0 success, 1 per-sample or stage errors,
// 2 usage or configuration errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace uhoi::cli
