#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace ncac {

struct CliOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed; // overrides the config's seed when set
    std::string out_dir = ".";
};

// Runs one subcommand end to end: parse + strictly validate the config,
// compute, write manifest.json (always first), then the result files.
// Returns the process exit code: 0 success, 2 input/schema error, 3 capacity
// exceeded, 4 non-convergence (adapt only), 1 anything else. Errors are
// printed to stderr.
int dispatch_command(const std::string& command, const CliOptions& opts);

} // namespace ncac
