#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "netsysid/buffers.hpp"
#include "netsysid/lti.hpp"
#include "netsysid/matrix.hpp"
#include "netsysid/network.hpp"
#include "netsysid/trace.hpp"

namespace netsysid {

/// Step-size selection: one shared gamma, or per-agent gamma_k = 1/(2 R_k)
/// with R_k the data-estimated state-norm radius. Empty radii under
/// per_agent mode means "estimate from the run's own trajectories".
struct StepSizePolicy {
  enum class Mode { global, per_agent };
  Mode mode = Mode::per_agent;
  double global_gamma = 0.0;
  std::vector<double> radii;

  static StepSizePolicy global(double gamma) {
    return {Mode::global, gamma, {}};
  }
  static StepSizePolicy per_agent() { return {Mode::per_agent, 0.0, {}}; }
};

/// R_k = sum of ||x_t|| over the first floor(2 ln T) states.
/// Norms accumulate in ascending t; each norm is sqrt of the ascending-j
/// sum of squares. This arithmetic order is part of the contract (results
/// are compared bitwise across implementations).
double estimate_radius(const Trajectory& traj, long long horizon);

/// Turns a policy into concrete per-agent step sizes, estimating radii
/// from the trajectories when the policy asks for it. A zero or negative
/// radius (all-zero data) is rejected.
std::vector<double> resolve_gammas(const StepSizePolicy& policy,
                                   std::span<const Trajectory> trajectories,
                                   long long horizon);

/// One least-squares SGD update on the transition pair (x_cur, x_next):
///   estimate - 2*gamma*(estimate*x_cur - x_next)*x_cur^T
/// where x_cur is the regressor state and x_next its successor in time.
/// The replay loop feeds pairs in reverse order, x_cur = x_{-(i+1)} and
/// x_next = x_{-i}, so each residual is the noise that produced x_next
/// and is independent of every regressor processed after it.
Matrix reverse_sgd_step(const Matrix& estimate, std::span<const double> x_cur,
                        std::span<const double> x_next, double gamma);

/// In-place form used by the hot loops. Fixed arithmetic order, mirrored
/// by the cross-implementation tests: residual r_i sums est(i,j)*x_cur[j]
/// ascending j then subtracts x_next[i]; the update subtracts
/// (c*r_i)*x_cur[j] with c = 2.0*gamma precomputed, i outer, j inner.
void reverse_sgd_step_in_place(Matrix& estimate, std::span<const double> x_cur,
                               std::span<const double> x_next, double gamma);

enum class RecordGranularity { per_buffer, final };

struct ReplayOptions {
  RecordGranularity record = RecordGranularity::per_buffer;
  InitialStateMode x0_mode = InitialStateMode::zero;
  NoiseKind noise = NoiseKind::gaussian;
  long long burn_in = 0;  // buffers excluded from the tail average
};

/// Test hook invoked after each buffer with the end-of-buffer iterates and
/// the tail averages so far.
using BufferObserver = std::function<void(long long buffer, std::span<const Matrix> end_iterates,
                                          std::span<const Matrix> tail_averages)>;

/// Buffered reverse-replay with gossip: per buffer, B reverse updates per
/// agent each followed by one gossip round; end-of-buffer iterates carry
/// over and feed a running tail average per agent. Estimates start at 0.
/// Gamma count must equal topology.m; trajectories must cover the layout.
/// Records the spectral error of each agent's tail average vs the true
/// transition matrix. Throws NumericalError on divergence (non-finite or
/// > 1e12 entries), naming buffer and step.
ErrorTrace run_dsgd_rer_on(const LtiSystem& system, const Topology& topology,
                           const BufferLayout& layout, std::span<const double> gammas,
                           std::span<const Trajectory> trajectories,
                           const ReplayOptions& options = {},
                           const BufferObserver* observer = nullptr);

/// Simulates topology.m agent trajectories for `seed`, resolves the step
/// policy on them, and runs the replay.
ErrorTrace run_dsgd_rer(const LtiSystem& system, const Topology& topology,
                        const BufferLayout& layout, const StepSizePolicy& policy,
                        std::uint64_t seed, const ReplayOptions& options = {});

/// Forward-order SGD baseline: per raw sample, one local update per agent
/// then one gossip round; the tail average runs over every iterate (no
/// buffers). Rows are recorded each `record_stride` samples and at the
/// final sample.
ErrorTrace run_vanilla_dsgd_on(const LtiSystem& system, const Topology& topology,
                               long long horizon, std::span<const double> gammas,
                               std::span<const Trajectory> trajectories,
                               long long record_stride);

ErrorTrace run_vanilla_dsgd(const LtiSystem& system, const Topology& topology,
                            long long horizon, const StepSizePolicy& policy,
                            std::uint64_t seed, long long record_stride,
                            const ReplayOptions& options = {});

/// Offline least squares pooled over all supplied trajectories:
/// A_hat = (sum x_{t+1} x_t^T)(sum x_t x_t^T)^{-1} via Cholesky solves.
/// Rejects an ill-conditioned second-moment matrix (cond >= 1e12).
Matrix ols_estimate(std::span<const Trajectory> trajectories);

}  // namespace netsysid
