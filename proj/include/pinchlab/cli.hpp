#pragma once

#include <ostream>

namespace pinchlab {

// Exit codes: 0 all checks pass, 1 a verification reported violations,
// 2 invalid input or construction failure.
inline constexpr int kExitPass = 0;
inline constexpr int kExitViolations = 1;
inline constexpr int kExitInvalid = 2;

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pinchlab
