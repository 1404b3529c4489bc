#pragma once

// Command-line front end. Subcommands: train, tag, eval, compare, synth.
// Exit codes: 0 success, 1 usage, 2 input or format error, 3 numeric or
// model failure.

#include <iosfwd>
#include <string>
#include <vector>

namespace evhmm {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitInput = 2;
inline constexpr int kExitNumeric = 3;

/// `args` includes the program name. A path of "-" reads `in` or writes `out`.
int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace evhmm
