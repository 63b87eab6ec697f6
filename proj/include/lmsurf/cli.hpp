// cli.hpp - the `lmsurf` command-line front end.
//
// Subcommands: design, simulate, sweep, analyze. Exit codes: 0 success,
// 1 runtime or numerical failure, 2 usage, config or input-format error.

#pragma once

#include <iosfwd>

namespace lmsurf {

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace lmsurf
