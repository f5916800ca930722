#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "netsysid/buffers.hpp"
#include "netsysid/lti.hpp"
#include "netsysid/matrix.hpp"

namespace netsysid {

/// Monte-Carlo check outcome. `mean`/`std_error` carry the primary
/// statistic when the check aggregates one (entrywise across replicas);
/// secondary named figures go to `extra`.
struct McReport {
  long long replicas = 0;
  long long discarded = 0;
  Matrix mean;
  Matrix std_error;
  bool pass = false;
  double worst_margin = 0.0;
  std::vector<std::pair<std::string, double>> extra;
};

/// Per-step average factor I - (2*gamma/m) * sum_k x_k x_k^T.
Matrix average_step_factor(std::span<const Vec> states, double gamma);

/// Product of the average factors over reverse indices i..j, accumulated
/// ascending with the earlier index leftmost: F_{-i} * F_{-(i+1)} * ... *
/// F_{-j}. The factors do not commute, so this order is the contract.
/// An empty range (i > j) yields the identity.
Matrix h_product(std::span<const Matrix> factors, long long i, long long j);

/// Checks the two-sided spectral sandwich on the reverse-replay step
/// product H = F_{-0} * ... * F_{-(B-1)} built from stationary coupled
/// states of m agents:
///   I - 4g(1 + e) * M  <=  H^T H  <=  I - 4g(1 - e) * M,
///   e = 2*gamma*B*R / (1 - 4*gamma*B*R),   M = sum_{i,k} x_ik x_ik^T,
/// in the positive-semidefinite order, tested through the minimum
/// eigenvalue of the symmetrized differences (tolerance -1e-9).
/// Requires gamma*B*R < 1/4. Replicas where any sampled ||x|| exceeds R
/// are discarded and counted; zero retained replicas is an error.
McReport contraction_check(const LtiSystem& system, int m, long long B, double gamma,
                           double radius, std::uint64_t seed, long long replicas);

/// Hook for deterministic hand-checks: the same sandwich evaluation on
/// explicitly supplied states (states[i][k], i = reverse step, k = agent).
/// Returns {lower margin, upper margin} = min eigenvalues of
/// (H^T H - lower bound) and (upper bound - H^T H).
std::pair<double, double> contraction_margins(std::span<const std::vector<Vec>> states,
                                              double gamma, double radius);

/// Monte-Carlo comparison of the two noise-coupling terms of forward vs
/// reverse SGD over a stationary length-B window:
///   forward: 2g * sum_s w_s x_s^T * prod_{l=s+1..B-1}(I - 2g x_l x_l^T)
///            (factors ascending l, left to right)
///   reverse: 2g * sum_j w_j x_j^T * prod_{r=j-1..0}(I - 2g x_r x_r^T)
///            (factors descending r, left to right)
/// Asserts the reverse mean is within 3 standard errors of 0 entrywise;
/// the forward mean is reported but not asserted. mean/std_error hold the
/// reverse statistic; extras carry the worst forward ratio.
McReport unbiasedness_mc(const LtiSystem& system, long long B, double gamma,
                         long long replicas, std::uint64_t seed);

/// Worst ratio ||x_i - xt_i|| / (||A^i|| * ||x_0 - xt_0|| + eps) over all
/// buffers and in-buffer indices of a coupled pair. Both processes share
/// noise, so the ratio stays <= 1 + 1e-9.
double coupled_gap(const LtiSystem& system, const Trajectory& traj,
                   const CoupledTrajectory& coupled, const BufferLayout& layout);

enum class MetricKind { spectral, frobenius };

/// Estimation error ||estimate - truth||, spectral by default.
double error_metric(const Matrix& estimate, const Matrix& truth,
                    MetricKind kind = MetricKind::spectral);

}  // namespace netsysid
