#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace flowgan::cli {

// Full command-line surface: args excludes the program name. Returns the process
// exit code (see ExitCode).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace flowgan::cli
