#pragma once

#include <string>
#include <vector>

#include "mcflab/config.hpp"
#include "mcflab/diagnostics.hpp"
#include "mcflab/exact_solutions.hpp"
#include "mcflab/flow_engine.hpp"
#include "mcflab/surgery.hpp"

namespace mcflab {

// Process exit codes shared by all subcommands.
enum ExitCode : int {
  exit_ok = 0,
  exit_failure = 1,         // comparison/tolerance failure
  exit_config = 2,          // config errors, unknown presets/keys
  exit_uncovered_time = 3,  // probe outside recorded history
  exit_grid_mismatch = 4,   // compare against mismatched time grid
  exit_self_intersection = 5,
  exit_no_separating_necks = 6,
};

struct ExperimentConfig {
  std::string preset;         // sphere | ellipse | grim-reaper | dumbbell |
                              // plane | snapshot (file input)
  std::string snapshot_path;  // when preset == "snapshot"
  int n = 1;
  std::size_t N = 256;
  // Geometry parameters (meaning depends on preset; unused ones ignored).
  double radius = 1.0;
  double a = 2.0, b = 1.0;              // ellipse semi-axes
  double halfwidth = 1.5;               // grim reaper p-extent scale
  double halflength = 40.0;             // plane segment half-length
  DumbbellSpec dumbbell;

  EngineParams engine;
  std::vector<StopCriterion> stops;
  bool with_surgery = false;
  SurgeryParams surgery;
  double horizon = std::numeric_limits<double>::infinity();

  std::vector<DensityProbe> probes;
  std::string out_dir;
  bool svg_frames = false;
  long long seed = 1;
};

// Parse + validate a config into an experiment (throws ConfigError).
ExperimentConfig parse_experiment(Config& cfg);

// Build the initial state for a preset (throws ConfigError for unknown ones).
FlowState initial_state(const ExperimentConfig& ec);

// Subcommand bodies; they write outputs, print a short report to stdout, and
// return an exit code instead of throwing.
int cmd_run(const std::string& config_path, const std::string& out_override,
            bool frames, long long stride_override);
int cmd_probe(const std::string& history_dir, const std::string& config_path);
int cmd_oracle(const std::string& name, const std::vector<double>& params,
               const std::string& out_dir);
int cmd_compare(const std::string& history_dir, const std::string& oracle_name,
                const std::vector<double>& params, double tolerance,
                const std::string& oracle_dir);

}  // namespace mcflab
