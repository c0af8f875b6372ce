#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dnnpart {

/// Exit statuses of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitUsage = 2;

/// Environment variable naming the directory that relative output paths
/// resolve against.
inline constexpr const char* kOutputDirEnv = "DNNPART_OUTPUT_DIR";

/// Runs one invocation; args[0] is the program name. Data goes to `out`
/// (or the requested file), diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dnnpart
