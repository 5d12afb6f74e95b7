#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qiopa::cli {

enum ExitCode : int { kSuccess = 0, kFailure = 1, kValidation = 2, kNumericalGuard = 3 };

// args[0] is the program name. Artifacts go to --out, or to `out` when no
// path is given; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qiopa::cli
