#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "netsysid/config.hpp"
#include "netsysid/trace.hpp"

namespace netsysid {

/// Applies the output-directory override from the environment variable
/// NETSYSID_OUT, when set.
void apply_output_override(ExperimentConfig& config);

/// Runs every (algorithm, seed) pair of the config in a worker pool and
/// writes one CSV per trace plus manifest.txt into the output directory.
/// Traces come back in the fixed entry order regardless of worker count.
/// workers <= 0 means one worker per entry, capped by the hardware.
std::vector<ErrorTrace> run_experiment(const ExperimentConfig& config, int workers = 1);

struct SweepResult {
  std::vector<ErrorTrace> traces;
  std::string out_dir;
};

/// Network-size sweep: runs the buffered replay for each network size with
/// the base topology (a single agent falls back to the identity topology,
/// the only one defined at m = 1). Group labels are "m<size>". Writes
/// CSVs, manifest.txt, summary.txt/.csv, and plot.svg.
SweepResult run_size_sweep(const ExperimentConfig& base, std::span<const int> sizes,
                           int workers = 1);

/// Topology sweep at fixed m: buffered replay on the identity ("net-a"),
/// cyclic 2/0.3 ("net-b"), and complete ("net-c") networks, plus the
/// forward-SGD baseline on the complete network ("vanilla"). Same outputs
/// as the size sweep.
SweepResult run_topology_sweep(const ExperimentConfig& base, int workers = 1);

struct SummaryRow {
  std::string group;
  long long seed_count = 0;
  double mean_final_error = 0.0;
  double std_final_error = 0.0;
  double ratio_vs_reference = 1.0;  // reference = first group
};

/// Final (last recorded sample count) agent-averaged error per group:
/// mean and std across seeds, plus the ratio against the first group.
/// Traces within one group must agree on algo and config hash.
std::vector<SummaryRow> summarize(std::span<const ErrorTrace> traces);

std::string summary_text(std::span<const SummaryRow> rows);
std::string summary_csv(std::span<const SummaryRow> rows);

/// Runs the numerical property suite: topology mixing bounds, gossip
/// average preservation, step-product contraction, reverse-term
/// unbiasedness, coupled-process decay, and kernel cross-checks.
/// Prints one line per check to `log`; returns the number of failures.
int run_verify(bool quick, std::ostream& log);

}  // namespace netsysid
