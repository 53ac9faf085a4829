#pragma once

#include <ostream>
#include <span>
#include <string>

namespace ookgate {

// Exit codes: 0 success, 1 computation/validation error, 2 input error,
// 3 rejection under --strict.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitInput = 2;
inline constexpr int kExitRejected = 3;

// Runs the command line `args` (without the program name).
int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace ookgate
