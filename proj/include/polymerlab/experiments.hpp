#pragma once

#include <string>
#include <vector>

#include "polymerlab/config.hpp"
#include "polymerlab/report.hpp"

// The theorem-checking harness.  Each experiment drives trajectories and/or
// samplers over a seed sweep, embeds its own negative control, and reduces
// everything into a deterministic ExperimentReport (identical reruns modulo
// wall time).  CSV artifacts land in the config's output directory.

namespace polymerlab {

struct ExperimentInfo {
  std::string name;
  std::string summary;      // one-line statement of the property checked
  std::string param_keys;   // accepted "params" keys, comma separated
};

const std::vector<ExperimentInfo>& experiment_catalog();

// Dispatch by cfg.experiment; throws ConfigError for unknown names or bad
// experiment-specific params.
ExperimentReport run_experiment(const RunConfig& cfg);

}  // namespace polymerlab
