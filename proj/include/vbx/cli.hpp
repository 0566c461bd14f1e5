#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace vbx {

// Exit codes: 0 every verdict passes, 1 some verdict fails, 2 malformed input.
enum ExitCode : int { kExitOk = 0, kExitFailed = 1, kExitInput = 2 };

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

}  // namespace vbx
