// Run drivers behind the CLI: full Monte Carlo runs with CSV + manifest
// output, parameter sweeps, and fronthaul load reports.
#pragma once

#include <string>
#include <vector>

#include "cfmimo/config.hpp"
#include "cfmimo/evaluation.hpp"

namespace cfmimo {

struct RunOptions {
  bool dump_layout = false;  // layout.csv of trial 0 geometry
  bool dump_links = false;   // large_scale.csv of trial 0
  bool dump_pilots = false;  // pilots.csv of trial 0
};

// Runs the Monte Carlo campaign and writes results.csv, cdf_cell_inside.csv,
// cdf_cell_edge.csv, manifest.cfg (and fh_trace.csv when enforcement is on)
// under out_dir. Returns 0 on success. Output bytes are a pure function of
// the manifest.
int run_command(const SimConfig& config, const std::string& out_dir,
                const RunOptions& options = {});

struct SweepAxes {
  std::vector<Scenario> scenarios;
  std::vector<Precoder> precoders;
  std::vector<double> alphas;
  std::vector<ApMode> ap_modes;
};

// Grid sweep; every valid combination runs in its own tagged subdirectory.
// Invalid combinations (e.g. jpzf outside full cooperation) are skipped with
// a note on stderr. Returns the number of runs executed.
int sweep_command(const SimConfig& base, const std::string& out_dir,
                  const SweepAxes& axes, const RunOptions& options = {});

// Per-node fronthaul loads of the configured association (no SINR
// evaluation); writes fh_report.csv under out_dir.
int fh_report_command(const SimConfig& config, const std::string& out_dir,
                      bool dump_links = false);

}  // namespace cfmimo
