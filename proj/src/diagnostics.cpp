#include "netsysid/diagnostics.hpp"

#include <cmath>
#include <stdexcept>

#include "netsysid/rng.hpp"

namespace netsysid {

Matrix average_step_factor(std::span<const Vec> states, double gamma) {
  if (states.empty()) throw std::invalid_argument("average_step_factor: no states");
  const int d = int(states[0].size());
  Matrix f = Matrix::identity(d);
  const double c = -2.0 * gamma / double(states.size());
  for (const Vec& x : states) add_outer(f, c, x, x);
  return f;
}

Matrix h_product(std::span<const Matrix> factors, long long i, long long j) {
  if (factors.empty()) throw std::invalid_argument("h_product: no factors");
  const int d = factors[0].rows();
  Matrix h = Matrix::identity(d);
  if (i > j) return h;
  if (i < 0 || j >= (long long)(factors.size()))
    throw std::invalid_argument("h_product: index range out of bounds");
  for (long long s = i; s <= j; ++s) h = matmul(h, factors[size_t(s)]);
  return h;
}

std::pair<double, double> contraction_margins(std::span<const std::vector<Vec>> states,
                                              double gamma, double radius) {
  const long long B = (long long)(states.size());
  if (B < 1) throw std::invalid_argument("contraction_margins: no steps");
  const int d = int(states[0][0].size());

  double gbr = gamma * double(B) * radius;
  if (!(gbr < 0.25))
    throw std::invalid_argument("contraction_margins: gamma*B*R must be < 1/4");

  std::vector<Matrix> factors;
  factors.reserve(size_t(B));
  Matrix outer_sum(d, d);
  for (const std::vector<Vec>& step : states) {
    factors.push_back(average_step_factor(step, gamma));
    for (const Vec& x : step) add_outer(outer_sum, 1.0, x, x);
  }
  Matrix h = h_product(factors, 0, B - 1);
  Matrix hth = matmul(transpose(h), h);

  double eps = 2.0 * gbr / (1.0 - 4.0 * gbr);
  Matrix lower = Matrix::identity(d);
  add_in_place(lower, scaled(outer_sum, -4.0 * gamma * (1.0 + eps)));
  Matrix upper = Matrix::identity(d);
  add_in_place(upper, scaled(outer_sum, -4.0 * gamma * (1.0 - eps)));

  auto min_eig_symmetrized = [](const Matrix& m) {
    Matrix s = add(m, transpose(m));
    Vec eig = symmetric_eigenvalues(scaled(s, 0.5));
    return eig.back();
  };
  double lower_margin = min_eig_symmetrized(sub(hth, lower));
  double upper_margin = min_eig_symmetrized(sub(upper, hth));
  return {lower_margin, upper_margin};
}

McReport contraction_check(const LtiSystem& system, int m, long long B, double gamma,
                           double radius, std::uint64_t seed, long long replicas) {
  if (m < 1) throw std::invalid_argument("contraction_check: m must be >= 1");
  if (B < 1) throw std::invalid_argument("contraction_check: B must be >= 1");
  if (replicas < 1) throw std::invalid_argument("contraction_check: replicas must be >= 1");
  if (!(gamma * double(B) * radius < 0.25))
    throw std::invalid_argument("contraction_check: gamma*B*R must be < 1/4");

  McReport report;
  report.pass = true;
  report.worst_margin = 1e300;
  const long long max_attempts = 200 * replicas;
  long long attempt = 0;
  while (report.replicas < replicas && attempt < max_attempts) {
    RngStream rng(seed, std::uint64_t(attempt), StreamPurpose::replica);
    ++attempt;
    // Stationary window per agent: B consecutive states, the tail of a
    // buffer started from pi. states[s][k] holds reverse index -s, so the
    // window's latest state sits at s = 0.
    std::vector<std::vector<Vec>> states(static_cast<size_t>(B), std::vector<Vec>(size_t(m)));
    bool within_radius = true;
    for (int k = 0; k < m; ++k) {
      Vec x0 = sample_stationary(system, rng);
      Trajectory window = B > 1 ? simulate(system, k, B - 1, x0, rng)
                                : Trajectory{k, system.dim, 0, x0, {}};
      for (long long i = 0; i < B; ++i) {
        auto xi = window.state(i);
        states[size_t(B - 1 - i)][size_t(k)] = Vec(xi.begin(), xi.end());
        if (vec_norm(xi) > radius) within_radius = false;
      }
    }
    if (!within_radius) {
      ++report.discarded;
      continue;
    }
    auto [lo, hi] = contraction_margins(states, gamma, radius);
    double margin = std::min(lo, hi);
    report.worst_margin = std::min(report.worst_margin, margin);
    if (margin < -1e-9) report.pass = false;
    ++report.replicas;
  }
  if (report.replicas == 0)
    throw NumericalError("contraction_check: event never held; raise the radius");
  if (report.replicas < replicas) report.pass = false;
  report.extra.emplace_back("retained", double(report.replicas));
  report.extra.emplace_back("discarded", double(report.discarded));
  return report;
}

McReport unbiasedness_mc(const LtiSystem& system, long long B, double gamma,
                         long long replicas, std::uint64_t seed) {
  if (replicas < 100) throw std::invalid_argument("unbiasedness_mc: need >= 100 replicas");
  if (B < 2) throw std::invalid_argument("unbiasedness_mc: B must be >= 2");
  const int d = system.dim;

  Matrix rev_sum(d, d), rev_sumsq(d, d);
  Matrix fwd_sum(d, d), fwd_sumsq(d, d);

  for (long long rep = 0; rep < replicas; ++rep) {
    RngStream rng(seed, std::uint64_t(rep), StreamPurpose::replica);
    Vec x0 = sample_stationary(system, rng);
    Trajectory traj = simulate(system, 0, B - 1, x0, rng, NoiseKind::gaussian,
                               /*keep_noises=*/true);

    std::vector<Matrix> factors;
    factors.reserve(size_t(B));
    for (long long t = 0; t < B; ++t) {
      Matrix f = Matrix::identity(d);
      add_outer(f, -2.0 * gamma, traj.state(t), traj.state(t));
      factors.push_back(std::move(f));
    }

    // Reverse term: accumulate ascending j with M_j = F_{j-1} * ... * F_0
    // (prepend the new factor), the trailing product seen by pair j when
    // the pairs are processed latest first.
    Matrix rev(d, d);
    Matrix m_rev = Matrix::identity(d);
    Vec xm(size_t(d), 0.0);
    for (long long j = 0; j < B - 1; ++j) {
      auto xj = traj.state(j);
      for (int col = 0; col < d; ++col) {
        double s = 0.0;
        for (int rr = 0; rr < d; ++rr) s += xj[size_t(rr)] * m_rev(rr, col);
        xm[size_t(col)] = s;
      }
      add_outer(rev, 2.0 * gamma, traj.noise(j), xm);
      m_rev = matmul(factors[size_t(j)], m_rev);
    }

    // Forward term: accumulate descending s with M_s = F_{s+1} * ... *
    // F_{B-1}, the trailing product of the later updates in time order.
    Matrix fwd(d, d);
    Matrix m_fwd = Matrix::identity(d);
    for (long long s = B - 2; s >= 0; --s) {
      m_fwd = matmul(factors[size_t(s + 1)], m_fwd);
      auto xs = traj.state(s);
      for (int col = 0; col < d; ++col) {
        double acc = 0.0;
        for (int rr = 0; rr < d; ++rr) acc += xs[size_t(rr)] * m_fwd(rr, col);
        xm[size_t(col)] = acc;
      }
      add_outer(fwd, 2.0 * gamma, traj.noise(s), xm);
    }

    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        rev_sum(i, j) += rev(i, j);
        rev_sumsq(i, j) += rev(i, j) * rev(i, j);
        fwd_sum(i, j) += fwd(i, j);
        fwd_sumsq(i, j) += fwd(i, j) * fwd(i, j);
      }
  }

  auto finalize = [&](const Matrix& sum, const Matrix& sumsq, Matrix& mean, Matrix& se) {
    mean = Matrix(d, d);
    se = Matrix(d, d);
    double n = double(replicas);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        double mu = sum(i, j) / n;
        double var = std::max(0.0, sumsq(i, j) / n - mu * mu) * n / (n - 1.0);
        mean(i, j) = mu;
        se(i, j) = std::sqrt(var / n);
      }
  };

  McReport report;
  report.replicas = replicas;
  Matrix fwd_mean, fwd_se;
  finalize(rev_sum, rev_sumsq, report.mean, report.std_error);
  finalize(fwd_sum, fwd_sumsq, fwd_mean, fwd_se);

  auto worst_ratio = [&](const Matrix& mean, const Matrix& se) {
    double worst = 0.0;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        double m_abs = std::fabs(mean(i, j));
        double s = se(i, j);
        if (s == 0.0) {
          if (m_abs > 0.0) return 1e300;
          continue;
        }
        worst = std::max(worst, m_abs / s);
      }
    return worst;
  };

  double rev_ratio = worst_ratio(report.mean, report.std_error);
  double fwd_ratio = worst_ratio(fwd_mean, fwd_se);
  report.pass = rev_ratio <= 3.0;
  report.worst_margin = 3.0 - rev_ratio;
  report.extra.emplace_back("reverse_worst_ratio", rev_ratio);
  report.extra.emplace_back("forward_worst_ratio", fwd_ratio);
  report.extra.emplace_back("forward_max_mean", max_abs(fwd_mean));
  return report;
}

double coupled_gap(const LtiSystem& system, const Trajectory& traj,
                   const CoupledTrajectory& coupled, const BufferLayout& layout) {
  if ((long long)(coupled.buffers.size()) != layout.buffer_count || coupled.block != layout.block)
    throw std::invalid_argument("coupled_gap: layout mismatch");
  if (traj.horizon < layout.block * layout.buffer_count)
    throw std::invalid_argument("coupled_gap: trajectory too short");
  const int d = system.dim;
  const double eps = 1e-30;

  // ||A^i|| along the same incremental recursion the gap itself follows.
  std::vector<double> pow_norm(size_t(layout.block));
  Matrix ai = Matrix::identity(d);
  for (long long i = 0; i < layout.block; ++i) {
    pow_norm[size_t(i)] = spectral_norm(ai);
    if (i + 1 < layout.block) ai = matmul(system.a, ai);
  }

  double worst = 0.0;
  Vec diff(size_t(d), 0.0);
  for (long long t = 0; t < layout.buffer_count; ++t) {
    auto x0 = traj.state(layout.block * t);
    auto xt0 = coupled.state(t, 0);
    for (int r = 0; r < d; ++r) diff[size_t(r)] = x0[size_t(r)] - xt0[size_t(r)];
    double base = vec_norm(diff);
    for (long long i = 0; i < layout.block; ++i) {
      auto xi = traj.state(layout.block * t + i);
      auto xti = coupled.state(t, i);
      for (int r = 0; r < d; ++r) diff[size_t(r)] = xi[size_t(r)] - xti[size_t(r)];
      double ratio = vec_norm(diff) / (pow_norm[size_t(i)] * base + eps);
      worst = std::max(worst, ratio);
    }
  }
  return worst;
}

double error_metric(const Matrix& estimate, const Matrix& truth, MetricKind kind) {
  if (!estimate.same_shape(truth)) throw std::invalid_argument("error_metric: shape mismatch");
  Matrix diff = sub(estimate, truth);
  return kind == MetricKind::spectral ? spectral_norm(diff) : frobenius_norm(diff);
}

}  // namespace netsysid
