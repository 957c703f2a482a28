#pragma once

#include <string>
#include <vector>

namespace gantsne {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitNumeric = 3;

// Full CLI entry point (args excludes argv[0]). Returns the process exit code.
int run_cli(const std::vector<std::string>& args);

} // namespace gantsne
