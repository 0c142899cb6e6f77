#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace binflux {

/// Process exit codes of the `binflux` tool.
namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int failure = 1; ///< I/O, malformed files, other errors
inline constexpr int usage = 2;
inline constexpr int config = 3;
inline constexpr int model_unsupported = 4;
inline constexpr int degenerate_evidence = 5; ///< also stability-rule rejections
} // namespace exit_code

/// Entry point of the command-line tool. Subcommands: simulate, matrix,
/// infer, compare, sweep, presets.
int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

/// Same, with argv[0] supplied implicitly.
int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

} // namespace binflux
