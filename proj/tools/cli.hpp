#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace smcmix::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitNumerical = 3;

/// Runs the command line `args` (args[0] is the program name). Reports go to
/// out; failures are printed to err as one JSON object per line.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace smcmix::cli
