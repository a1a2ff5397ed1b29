#pragma once

#include <atomic>
#include <iosfwd>

namespace imitation::cli {

// Runs the command line. Exit codes: 0 success, 1 runtime failure (one line
// "error: ..." on err), 2 usage error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err,
        std::atomic<bool>* stop = nullptr);

}  // namespace imitation::cli
