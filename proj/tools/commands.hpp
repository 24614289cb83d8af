#pragma once

// Subcommands of the vsm tool. Each returns the process exit code:
// 0 ok, 2 usage or configuration error, 3 numerical failure.

#include <optional>
#include <string>

namespace vsm::app {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;

struct CommandOptions {
    std::string config;   // INI path; defaults apply when empty
    std::string model;    // model directory
    std::string out_dir = "out";
    std::optional<std::string> eps;    // comma-separated list, unset = config default
    std::optional<std::string> order;  // comma-separated list, unset = config default
    unsigned threads = 1;
};

int cmd_build(const CommandOptions& o);
int cmd_residual_sweep(const CommandOptions& o);
int cmd_simulate(const CommandOptions& o);
int cmd_verify(const CommandOptions& o);
int cmd_bounds_check(const CommandOptions& o);
int cmd_rescaled_check(const CommandOptions& o);

}  // namespace vsm::app
