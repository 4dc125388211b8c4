#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qspace::cli {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kOutDirEnv = "QSPACE_OUT_DIR";

enum ExitCode : int { kSuccess = 0, kInputError = 1, kToleranceFailure = 2 };

// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace qspace::cli
