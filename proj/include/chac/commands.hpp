#pragma once

#include <iosfwd>

#include "chac/config.hpp"

namespace chac {

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitSolver = 2 };

/// Runs one simulation; writes timeseries.csv, run.cfg and optional VTK snapshots
/// into cfg.output_dir.
int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Runs the refinement ladder k_min..k_max; writes convergence.csv into
/// cfg.output_dir and prints the table.
int cmd_converge(const RunConfig& cfg, int k_min, int k_max, int jobs, std::ostream& out, std::ostream& err);

/// Short self-check: 20 steps on the configured level, one PASS/FAIL line per
/// invariant. Returns 0 only when every line passes.
int cmd_check(const RunConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace chac
