#pragma once

#include "tailwave/analysis.hpp"
#include "tailwave/config.hpp"
#include "tailwave/probes.hpp"

#include <string>

namespace tailwave {

// A declarative run: background + data + grid + measurement requests +
// verdict bands, resolved from a flat key = value config. Every output file
// carries the resolved-config hash and the grid parameters.
struct ScenarioResult {
    int exit_code = 0; // 0 pass, 1 verdict fail, 2 config error, 3 numerical error
    Report report;
    std::string out_dir;
};

// Exit code 2 problems throw ConfigError; numerical failures throw Error.
ScenarioResult run_scenario(const Config& cfg, const std::string& out_root, bool dry_run);

// Cross product over sweep.* axes, one cell per combination, parallel up to
// `jobs`. Returns the worst cell exit code.
int run_sweep(const Config& cfg, const std::string& out_root, int jobs);

// Resolve the output root: TAILWAVE_OUT env var overrides `output.dir`.
std::string resolve_out_root(const Config& cfg, const std::string& cli_override);

} // namespace tailwave
