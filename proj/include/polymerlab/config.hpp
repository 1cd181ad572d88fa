#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "polymerlab/dynamics.hpp"
#include "polymerlab/potential.hpp"

// Run configuration: schema-validated JSON, the single source of truth for an
// experiment run.  Unknown keys are rejected; the sigma^2 = 2/beta coupling is
// enforced unless a mismatch is explicitly allowed (negative controls).

namespace polymerlab {

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct RunConfig {
  std::string experiment;
  std::string output_dir;
  std::vector<std::uint64_t> seeds;
  PotentialField potential;
  std::uint64_t noise_seed = 0;
  SdeConfig sde;
  nlohmann::json params = nlohmann::json::object();  // experiment-specific
  bool allow_sigma_beta_mismatch = false;

  std::string canonical_json;  // sorted-key dump of the validated config
  std::string digest;          // fnv-1a hex of canonical_json
};

RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::string& file);

// Helper shared with experiment-specific validation: rejects keys outside the
// allowed set, with a context string for the error message.
void reject_unknown_keys(const nlohmann::json& obj,
                         const std::vector<std::string>& allowed,
                         const std::string& context);

std::string digest_hex(const std::string& text);

}  // namespace polymerlab
