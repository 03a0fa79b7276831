#pragma once

#include <iosfwd>

namespace uanet::app {

// Exit status: 0 success, 1 runtime failure, 2 bad configuration, bad
// arguments or a missing input. Logs go to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace uanet::app
