#pragma once

#include <string>
#include <vector>

#include "encplan/config.hpp"

namespace encplan {

struct CommandResult {
  int exit_code = 0;               // 0 ok, 1 domain failure recorded in the outputs
  std::vector<std::string> files;  // relative to config.out, in write order
  std::string summary;             // one line for the terminal
};

/// Loads, validates and optionally rescales the system named in the config.
PowerSystem load_configured_system(const RunConfig& config);
/// Representative days for the config (k, variance target, seed).
std::vector<RepresentativeDay> configured_days(const RunConfig& config, const PowerSystem& system);

/// repdays.csv
CommandResult cmd_reduce(const RunConfig& config);
/// repdays.csv, records.csv, outcome.json, solution_<p>.json, audit_<p>.json.
/// With the mps-only solver: mps/*.mps, name sidecars and mps/manifest.txt,
/// nothing solved.
CommandResult cmd_plan(const RunConfig& config);
/// sweep.csv, report/*, manifest.json listing failed cells. Exit code 1 when
/// any cell failed. An empty grid is a UsageError.
CommandResult cmd_sweep(const RunConfig& config);
/// verify.json: scenario, dispatch, ENC, duality and big-M audits at the
/// configured cell. Exit code 1 when an invariant fails.
CommandResult cmd_verify(const RunConfig& config);

/// Full command line: `encplan <reduce|plan|sweep|verify> [--config FILE]
/// [--<key> VALUE ...] [--set key=value ...]`. Returns the exit code; errors go
/// to stderr.
int run_cli(int argc, char** argv);

}  // namespace encplan
