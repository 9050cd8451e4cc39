#pragma once

#include <iosfwd>

#include "angsurf/error.hpp"

namespace angsurf::cli {

/// Process exit status for each error category; 0 is success and 1 an
/// unexpected failure.
int exit_code(ErrorCode code) noexcept;

/// Runs one subcommand. Results go to files under --out (plus a cumulative
/// manifest.json); `out` receives short summaries and `err` structured
/// error records.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace angsurf::cli
