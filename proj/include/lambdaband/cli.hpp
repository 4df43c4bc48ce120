#pragma once

#include <iosfwd>

namespace lambdaband {

// Exit codes: 0 success (including empty confidence sets), 1 I/O error,
// 2 usage or config error, 3 estimation failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace lambdaband
