#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace otfs {

// Exit codes: 0 success, 2 validation or usage error, 1 runtime failure.
int cli_main(int argc, const char* const* argv);
// args excludes the program name.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace otfs
