#pragma once

#include <iosfwd>

namespace foucault::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitAcceptance = 3;

inline constexpr const char* kVersion = "0.1.0";

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace foucault::cli
