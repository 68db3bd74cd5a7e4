#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qsec::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // oracle mismatch or unexpected error
inline constexpr int kExitUsage = 2;    // usage or parse errors
inline constexpr int kExitShape = 3;    // shape or validation errors
inline constexpr int kExitTrivial = 4;  // trivial space of sections

/// Runs one qsec invocation (args exclude the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qsec::cli
