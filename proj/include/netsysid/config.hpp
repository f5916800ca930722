#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "netsysid/buffers.hpp"
#include "netsysid/estimator.hpp"
#include "netsysid/lti.hpp"
#include "netsysid/network.hpp"

namespace netsysid {

/// Raised for malformed config files, presets, or CLI inputs (exit code 1).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SystemSpec {
  int d = 5;
  std::vector<double> eigenvalues = {0.9, 0.3};  // full list or two levels
  std::vector<double> sigma_diag;                // empty: identity
  std::uint64_t system_seed = 7;
};

/// Flat, fully explicit description of one experiment; two equal configs
/// produce byte-identical outputs. Parsed from a sectioned key-value file.
struct ExperimentConfig {
  SystemSpec system;

  long long horizon = 200000;
  long long gap = -1;             // -1: floor(sqrt(T / ln T))
  long long update_count = -1;    // -1: update_multiplier * gap
  long long update_multiplier = 10;

  TopologySpec topology;
  std::string topology_file;      // custom topology source, if any
  int m = 5;

  StepSizePolicy::Mode step_mode = StepSizePolicy::Mode::per_agent;
  double global_gamma = 0.0;
  NoiseKind noise = NoiseKind::gaussian;
  InitialStateMode x0_mode = InitialStateMode::zero;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  RecordGranularity record = RecordGranularity::per_buffer;
  long long burn_in = 0;
  std::vector<std::string> algos = {"dsgd-rer"};

  std::string out_dir = "out/run";
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

/// Normalized full dump; parsing it back yields an equal config. This text
/// goes into the run manifest and is what the config hash covers.
std::string canonical_config_text(const ExperimentConfig& config);

/// FNV-1a (64-bit) over the canonical text.
std::uint64_t config_hash(const ExperimentConfig& config);

/// Builtin presets: "desk" (T = 2e5 scale, CI-friendly) and "full"
/// (T = 1e7, hours of compute, excluded from CI).
ExperimentConfig preset(const std::string& name);

/// Resolves the auto gap/update-count formulas into a concrete layout.
BufferLayout layout_for(const ExperimentConfig& config);

LtiSystem system_for(const ExperimentConfig& config);
Topology topology_for(const ExperimentConfig& config);
StepSizePolicy policy_for(const ExperimentConfig& config);

}  // namespace netsysid
