#pragma once

#include <string>
#include <vector>

namespace zeno::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Environment variable that overrides the output directory when --out-dir is not given.
inline constexpr const char* kOutDirEnv = "ZENO_OUT_DIR";

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,
  kIo = 3,
  kParse = 4,
  kRange = 5,
  kNumerical = 6,
};

/// Runs one subcommand. `args` excludes the program name.
int run(const std::vector<std::string>& args);

int main(int argc, char** argv);

}  // namespace zeno::cli
