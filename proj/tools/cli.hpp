#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lionmdp::cli {

inline constexpr const char* kVersion = "0.1.0";
/// Environment variable naming the default output directory.
inline constexpr const char* kOutputDirEnv = "LIONMDP_OUTPUT_DIR";

enum ExitCode : int { kOk = 0, kUsage = 1, kNotConverged = 2 };

/// Entry point behind the `lionmdp` binary; args exclude the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace lionmdp::cli
