#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dmtl {

// Exit codes of the command-line front end.
enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitLoad = 2, kExitLimit = 3 };

// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dmtl
