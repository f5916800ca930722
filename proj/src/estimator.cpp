#include "netsysid/estimator.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace netsysid {

namespace {

// Average = sum / count entrywise, division spelled out so the arithmetic
// matches the cross-implementation reference bit for bit.
void tail_average_into(const Matrix& tail_sum, long long count, Matrix& out) {
  if (!out.same_shape(tail_sum)) out = Matrix(tail_sum.rows(), tail_sum.cols());
  auto src = tail_sum.data();
  auto dst = out.data();
  for (size_t i = 0; i < src.size(); ++i) dst[i] = src[i] / double(count);
}

void check_estimates_finite(const std::vector<Matrix>& estimates, const char* algo,
                            long long buffer, long long step) {
  for (const Matrix& e : estimates) {
    for (double v : e.data()) {
      if (!std::isfinite(v) || std::fabs(v) > 1e12)
        throw NumericalError(std::string(algo) + ": divergence at buffer " +
                             std::to_string(buffer) + ", step " + std::to_string(step));
    }
  }
}

double spectral_error(const Matrix& estimate, const Matrix& truth) {
  return spectral_norm(sub(estimate, truth));
}

}  // namespace

double estimate_radius(const Trajectory& traj, long long horizon) {
  long long window = radius_window(horizon);
  if (traj.horizon + 1 < window)
    throw std::invalid_argument("estimate_radius: trajectory shorter than the window");
  double r = 0.0;
  for (long long t = 0; t < window; ++t) r += vec_norm(traj.state(t));
  return r;
}

std::vector<double> resolve_gammas(const StepSizePolicy& policy,
                                   std::span<const Trajectory> trajectories,
                                   long long horizon) {
  std::vector<double> gammas(trajectories.size());
  if (policy.mode == StepSizePolicy::Mode::global) {
    if (policy.global_gamma <= 0.0)
      throw std::invalid_argument("step policy: global gamma must be positive");
    for (double& g : gammas) g = policy.global_gamma;
    return gammas;
  }
  std::vector<double> radii = policy.radii;
  if (radii.empty()) {
    radii.resize(trajectories.size());
    for (size_t k = 0; k < trajectories.size(); ++k)
      radii[k] = estimate_radius(trajectories[k], horizon);
  }
  if (radii.size() != trajectories.size())
    throw std::invalid_argument("step policy: radius count mismatch");
  for (size_t k = 0; k < radii.size(); ++k) {
    if (!(radii[k] > 0.0))
      throw std::invalid_argument("step policy: nonpositive radius for agent " + std::to_string(k));
    gammas[k] = 1.0 / (2.0 * radii[k]);
  }
  return gammas;
}

void reverse_sgd_step_in_place(Matrix& estimate, std::span<const double> x_cur,
                               std::span<const double> x_next, double gamma) {
  const int d = estimate.rows();
  if (estimate.cols() != d || int(x_cur.size()) != d || int(x_next.size()) != d)
    throw std::invalid_argument("reverse_sgd_step: shape mismatch");
  const double c = 2.0 * gamma;
  Vec r(size_t(d), 0.0);
  for (int i = 0; i < d; ++i) {
    double s = 0.0;
    for (int j = 0; j < d; ++j) s += estimate(i, j) * x_cur[size_t(j)];
    r[size_t(i)] = s - x_next[size_t(i)];
  }
  for (int i = 0; i < d; ++i) {
    double ci = c * r[size_t(i)];
    for (int j = 0; j < d; ++j) estimate(i, j) -= ci * x_cur[size_t(j)];
  }
}

Matrix reverse_sgd_step(const Matrix& estimate, std::span<const double> x_cur,
                        std::span<const double> x_next, double gamma) {
  Matrix out = estimate;
  reverse_sgd_step_in_place(out, x_cur, x_next, gamma);
  return out;
}

ErrorTrace run_dsgd_rer_on(const LtiSystem& system, const Topology& topology,
                           const BufferLayout& layout, std::span<const double> gammas,
                           std::span<const Trajectory> trajectories,
                           const ReplayOptions& options, const BufferObserver* observer) {
  const int m = topology.m;
  const int d = system.dim;
  if (int(trajectories.size()) != m)
    throw std::invalid_argument("run_dsgd_rer: trajectory count != m");
  if (int(gammas.size()) != m) throw std::invalid_argument("run_dsgd_rer: gamma count != m");
  if (layout.gap < 1)
    throw std::invalid_argument("run_dsgd_rer: gap must be >= 1 (the last update of a "
                                "block reads state index u-1)");
  const long long needed = layout.block * layout.buffer_count;
  for (const Trajectory& tr : trajectories) {
    if (tr.dim != d) throw std::invalid_argument("run_dsgd_rer: trajectory dimension mismatch");
    if (tr.horizon < needed) throw std::invalid_argument("run_dsgd_rer: trajectory too short");
  }
  if (options.burn_in < 0 || options.burn_in >= layout.buffer_count)
    throw std::invalid_argument("run_dsgd_rer: burn-in out of range");

  std::vector<Matrix> current(size_t(m), Matrix(d, d));
  std::vector<Matrix> scratch;
  std::vector<Matrix> tail_sum(size_t(m), Matrix(d, d));
  std::vector<Matrix> tail_avg(size_t(m), Matrix(d, d));

  ErrorTrace trace;
  trace.algo = "dsgd-rer";

  for (long long t = 0; t < layout.buffer_count; ++t) {
    for (long long i = 0; i < layout.update_count; ++i) {
      for (int k = 0; k < m; ++k) {
        const Trajectory& tr = trajectories[size_t(k)];
        auto x_cur = tr.state(layout.reverse_state_index(t, i + 1));
        auto x_next = tr.state(layout.reverse_state_index(t, i));
        reverse_sgd_step_in_place(current[size_t(k)], x_cur, x_next, gammas[size_t(k)]);
      }
      gossip_mix_into(topology, current, scratch);
      current.swap(scratch);
      check_estimates_finite(current, "dsgd-rer", t, i);
    }

    bool averaged = t >= options.burn_in;
    long long avg_count = t - options.burn_in + 1;
    if (averaged) {
      for (int k = 0; k < m; ++k) {
        add_in_place(tail_sum[size_t(k)], current[size_t(k)]);
        tail_average_into(tail_sum[size_t(k)], avg_count, tail_avg[size_t(k)]);
      }
    }

    if (observer) (*observer)(t, current, tail_avg);

    bool record = averaged && (options.record == RecordGranularity::per_buffer ||
                               t == layout.buffer_count - 1);
    if (record) {
      for (int k = 0; k < m; ++k)
        trace.rows.push_back({t, (t + 1) * layout.block, k,
                              spectral_error(tail_avg[size_t(k)], system.a)});
    }
  }
  return trace;
}

ErrorTrace run_dsgd_rer(const LtiSystem& system, const Topology& topology,
                        const BufferLayout& layout, const StepSizePolicy& policy,
                        std::uint64_t seed, const ReplayOptions& options) {
  std::vector<Trajectory> trajectories;
  trajectories.reserve(size_t(topology.m));
  for (int k = 0; k < topology.m; ++k)
    trajectories.push_back(simulate_agent(system, k, layout.horizon, seed, options.x0_mode,
                                          options.noise, /*keep_noises=*/false));
  std::vector<double> gammas = resolve_gammas(policy, trajectories, layout.horizon);
  ErrorTrace trace = run_dsgd_rer_on(system, topology, layout, gammas, trajectories, options);
  trace.seed = seed;
  return trace;
}

ErrorTrace run_vanilla_dsgd_on(const LtiSystem& system, const Topology& topology,
                               long long horizon, std::span<const double> gammas,
                               std::span<const Trajectory> trajectories,
                               long long record_stride) {
  const int m = topology.m;
  const int d = system.dim;
  if (int(trajectories.size()) != m)
    throw std::invalid_argument("run_vanilla_dsgd: trajectory count != m");
  if (int(gammas.size()) != m) throw std::invalid_argument("run_vanilla_dsgd: gamma count != m");
  if (record_stride < 1) throw std::invalid_argument("run_vanilla_dsgd: stride must be >= 1");
  for (const Trajectory& tr : trajectories) {
    if (tr.dim != d) throw std::invalid_argument("run_vanilla_dsgd: trajectory dimension mismatch");
    if (tr.horizon < horizon) throw std::invalid_argument("run_vanilla_dsgd: trajectory too short");
  }

  std::vector<Matrix> current(size_t(m), Matrix(d, d));
  std::vector<Matrix> scratch;
  std::vector<Matrix> tail_sum(size_t(m), Matrix(d, d));
  Matrix avg(d, d);

  ErrorTrace trace;
  trace.algo = "vanilla-dsgd";

  for (long long t = 0; t < horizon; ++t) {
    for (int k = 0; k < m; ++k) {
      const Trajectory& tr = trajectories[size_t(k)];
      // Forward update: feature x_t, target x_{t+1}; same kernel as the
      // reverse step applied in time order.
      reverse_sgd_step_in_place(current[size_t(k)], tr.state(t), tr.state(t + 1),
                                gammas[size_t(k)]);
    }
    gossip_mix_into(topology, current, scratch);
    current.swap(scratch);
    check_estimates_finite(current, "vanilla-dsgd", t / record_stride, t % record_stride);
    for (int k = 0; k < m; ++k) add_in_place(tail_sum[size_t(k)], current[size_t(k)]);

    long long done = t + 1;
    if (done % record_stride == 0 || done == horizon) {
      long long bucket = done % record_stride == 0 ? done / record_stride - 1
                                                   : done / record_stride;
      for (int k = 0; k < m; ++k) {
        tail_average_into(tail_sum[size_t(k)], done, avg);
        trace.rows.push_back({bucket, done, k, spectral_error(avg, system.a)});
      }
    }
  }
  return trace;
}

ErrorTrace run_vanilla_dsgd(const LtiSystem& system, const Topology& topology,
                            long long horizon, const StepSizePolicy& policy,
                            std::uint64_t seed, long long record_stride,
                            const ReplayOptions& options) {
  std::vector<Trajectory> trajectories;
  trajectories.reserve(size_t(topology.m));
  for (int k = 0; k < topology.m; ++k)
    trajectories.push_back(simulate_agent(system, k, horizon, seed, options.x0_mode,
                                          options.noise, /*keep_noises=*/false));
  std::vector<double> gammas = resolve_gammas(policy, trajectories, horizon);
  ErrorTrace trace =
      run_vanilla_dsgd_on(system, topology, horizon, gammas, trajectories, record_stride);
  trace.seed = seed;
  return trace;
}

Matrix ols_estimate(std::span<const Trajectory> trajectories) {
  if (trajectories.empty()) throw std::invalid_argument("ols: no trajectories");
  const int d = trajectories[0].dim;
  Matrix sxx(d, d);
  Matrix syx(d, d);
  for (const Trajectory& tr : trajectories) {
    if (tr.dim != d) throw std::invalid_argument("ols: dimension mismatch");
    for (long long t = 0; t < tr.horizon; ++t) {
      auto x = tr.state(t);
      auto y = tr.state(t + 1);
      add_outer(sxx, 1.0, x, x);
      add_outer(syx, 1.0, y, x);
    }
  }
  Vec eig = symmetric_eigenvalues(sxx);
  double lo = eig.back(), hi = eig.front();
  if (!(lo > 0.0) || hi / lo >= 1e12)
    throw NumericalError("ols: singular covariance", lo);

  Matrix chol = cholesky(sxx);
  Matrix a_hat(d, d);
  Vec rhs(size_t(d), 0.0);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) rhs[size_t(j)] = syx(i, j);
    Vec row = cholesky_solve(chol, rhs);
    for (int j = 0; j < d; ++j) a_hat(i, j) = row[size_t(j)];
  }
  return a_hat;
}

}  // namespace netsysid
