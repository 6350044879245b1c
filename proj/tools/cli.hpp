#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "tattooed/errors.hpp"

namespace tattooed::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;   // I/O and anything unclassified
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNegative = 10; // verify ran and found no watermark

/// 20 + the error kind's position, so every library error class has its own code.
int exit_code(ErrorKind kind);

/// Runs one command. `args` excludes the program name. Results go to `out`,
/// logs and diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tattooed::cli
