#pragma once

#include "nls/config.hpp"

#include <string>
#include <vector>

namespace nls {

enum ExitCode { kExitOk = 0, kExitConfig = 1, kExitNonConvergence = 2 };

struct ScenarioOutcome {
    int exit_code = kExitOk;
    std::string report;               // contents of report.txt
    std::vector<std::string> files;   // data files written, relative to the output directory
};

/// `config.output`, placed under $NLS_OUTPUT_ROOT when that is set and the
/// path is relative.
std::string resolve_output_dir(const ScenarioConfig& config);

/// Runs the configured experiment and writes report.txt plus its data files
/// into `out_dir`. Solver failures map to kExitNonConvergence; configuration
/// problems found while building the problem raise ConfigError.
ScenarioOutcome run_scenario(const ScenarioConfig& config, const std::string& out_dir);

/// Epsilon sweep of the leader (distributed or boundary follower).
ScenarioOutcome run_sweep(const ScenarioConfig& config, const std::vector<double>& eps_list,
                          const std::string& out_dir);

/// Observability probe for the configured follower channel.
ScenarioOutcome run_probe(const ScenarioConfig& config, int samples, const std::string& out_dir);

}  // namespace nls
