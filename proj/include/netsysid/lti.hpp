#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "netsysid/buffers.hpp"
#include "netsysid/matrix.hpp"
#include "netsysid/rng.hpp"

namespace netsysid {

enum class NoiseKind {
  gaussian,   // w = sigma_chol * z, z standard normal
  bounded,    // w = sigma_chol * z, z independent Rademacher signs
};

enum class InitialStateMode {
  zero,
  stationary,
};

/// Stable linear system x_{t+1} = A x_t + w_t with noise covariance Sigma
/// and stationary covariance G solving G = A G A^T + Sigma.
/// Cholesky factors of Sigma and G are precomputed for sampling; an exactly
/// zero Sigma is accepted for noiseless tests and yields zero factors.
struct LtiSystem {
  int dim = 0;
  Matrix a;
  Matrix sigma;
  Matrix g;
  Matrix sigma_chol;
  Matrix g_chol;
};

/// Builds a system from an explicit transition matrix. Requires
/// spectral_norm(a) < 1 and sigma symmetric positive definite (or all-zero).
LtiSystem make_system_from(const Matrix& a, const Matrix& sigma);

/// Builds A = U diag(eigenvalues) U^T with U a seeded random orthogonal
/// matrix (QR of a standard Gaussian matrix, R diagonal made positive).
/// `eigenvalues` is either a full list of d values, or two level values
/// expanded to ceil(d/2) copies of the first and the rest the second.
/// Any |eigenvalue| >= 1 raises "unstable spec".
LtiSystem make_system(int d, const std::vector<double>& eigenvalues, const Matrix& sigma,
                      std::uint64_t seed);

/// One agent's simulated path: states x_0..x_T and optionally the noises
/// w_0..w_{T-1} that produced them. Immutable after construction.
struct Trajectory {
  int agent = 0;
  int dim = 0;
  long long horizon = 0;  // T; states has T+1 rows
  std::vector<double> states;   // row-major (T+1) x d
  std::vector<double> noises;   // row-major T x d, empty unless kept

  std::span<const double> state(long long t) const {
    return {states.data() + t * dim, size_t(dim)};
  }
  std::span<const double> noise(long long t) const {
    return {noises.data() + t * dim, size_t(dim)};
  }
};

/// Simulates T steps from x0 using the agent's dedicated noise stream.
/// keep_noises controls whether the noise sequence is retained (needed by
/// the coupled-process diagnostics, dead weight for plain estimation).
Trajectory simulate(const LtiSystem& system, int agent, long long horizon,
                    std::span<const double> x0, RngStream& rng,
                    NoiseKind noise = NoiseKind::gaussian, bool keep_noises = false);

/// Convenience: builds the agent's noise stream from (seed, agent) and an
/// initial state per `x0_mode`, then simulates.
Trajectory simulate_agent(const LtiSystem& system, int agent, long long horizon,
                          std::uint64_t seed, InitialStateMode x0_mode,
                          NoiseKind noise = NoiseKind::gaussian, bool keep_noises = false);

/// Draws from the stationary distribution: g_chol * z with z standard
/// normal, so the sample covariance is exactly G.
Vec sample_stationary(const LtiSystem& system, RngStream& rng);

/// Auxiliary process used by the decorrelation diagnostics: per buffer, a
/// fresh stationary start evolved with the SAME noise realizations as the
/// actual trajectory's samples in that buffer.
struct CoupledTrajectory {
  int dim = 0;
  long long block = 0;                      // S states per buffer
  std::vector<std::vector<double>> buffers;  // buffer t: row-major S x d

  std::span<const double> state(long long buffer, long long i) const {
    return {buffers[size_t(buffer)].data() + i * dim, size_t(dim)};
  }
};

/// Requires traj to carry its noises and to cover layout.block * layout.buffer_count
/// samples. Fresh starts come from the supplied stream.
CoupledTrajectory make_coupled(const LtiSystem& system, const Trajectory& traj,
                               const BufferLayout& layout, RngStream& rng);

/// Flat binary persistence: magic "LTITRAJ1", then d, T, agent as
/// little-endian 64-bit integers, then row-major float64 states.
/// Noise sequences are not persisted.
void save_trajectory(const Trajectory& traj, const std::string& path);
Trajectory load_trajectory(const std::string& path);

}  // namespace netsysid
