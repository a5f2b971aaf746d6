#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "dnprobe/config.hpp"

namespace dnprobe {

struct CommandContext {
    ExperimentConfig cfg;
    std::filesystem::path out;
    bool verbose = false;
    std::ostream* log = nullptr;  // human-readable tables and progress
};

/// Smooth bump on S × (0,T), vanishing at t = 0 and t = T, peak value `amplitude`.
BoundaryField bump_data(const Grid& g, double amplitude);

int cmd_forward(const CommandContext& ctx);
int cmd_linearize_check(const CommandContext& ctx);
int cmd_probe(const CommandContext& ctx, Target target);
int cmd_stability(const CommandContext& ctx, Target target);
/// Collects the JSON summaries found in the output directory.
int cmd_report(const std::filesystem::path& dir, std::ostream& log);

/// Entry point of the dnprobe executable. Exit codes: 0 success, 1 runtime
/// failure, 2 invalid configuration or usage.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace dnprobe
