#include "netsysid/lti.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace netsysid {

namespace {

bool is_zero_matrix(const Matrix& m) { return max_abs(m) == 0.0; }

// w = L z for lower-triangular L, appended into out.
void lower_tri_apply(const Matrix& l, std::span<const double> z, std::span<double> out) {
  const int d = l.rows();
  for (int i = 0; i < d; ++i) {
    double s = 0.0;
    for (int j = 0; j <= i; ++j) s += l(i, j) * z[size_t(j)];
    out[size_t(i)] = s;
  }
}

void draw_unit_noise(RngStream& rng, NoiseKind kind, std::span<double> z) {
  if (kind == NoiseKind::gaussian) {
    rng.fill_normal(z);
  } else {
    for (double& v : z) v = (rng.next_u64() >> 63) ? 1.0 : -1.0;
  }
}

}  // namespace

LtiSystem make_system_from(const Matrix& a, const Matrix& sigma) {
  if (a.rows() != a.cols()) throw std::invalid_argument("make_system_from: A not square");
  if (!a.same_shape(sigma)) throw std::invalid_argument("make_system_from: shape mismatch");
  if (spectral_norm(a) >= 1.0) throw std::invalid_argument("make_system_from: unstable spec");

  LtiSystem sys;
  sys.dim = a.rows();
  sys.a = a;
  sys.sigma = sigma;
  if (is_zero_matrix(sigma)) {
    // Noiseless test systems: G = 0, degenerate by design.
    sys.g = Matrix(sys.dim, sys.dim);
    sys.sigma_chol = Matrix(sys.dim, sys.dim);
    sys.g_chol = Matrix(sys.dim, sys.dim);
  } else {
    sys.sigma_chol = cholesky(sigma);
    sys.g = solve_lyapunov(a, sigma);
    sys.g_chol = cholesky(sys.g);
  }
  return sys;
}

LtiSystem make_system(int d, const std::vector<double>& eigenvalues, const Matrix& sigma,
                      std::uint64_t seed) {
  if (d < 1) throw std::invalid_argument("make_system: dimension must be positive");
  std::vector<double> lambda;
  if (int(eigenvalues.size()) == d) {
    lambda = eigenvalues;
  } else if (eigenvalues.size() == 2) {
    // Two levels: ceil(d/2) at the first level, the rest at the second.
    lambda.assign(size_t(d), eigenvalues[1]);
    for (int i = 0; i < (d + 1) / 2; ++i) lambda[size_t(i)] = eigenvalues[0];
  } else {
    throw std::invalid_argument("make_system: need d eigenvalues or two levels");
  }
  for (double v : lambda)
    if (std::fabs(v) >= 1.0) throw std::invalid_argument("make_system: unstable spec");

  RngStream rng(seed, 0, StreamPurpose::orthogonal_factor);
  Matrix gauss(d, d);
  for (double& v : gauss.data()) v = rng.next_normal();

  // Orthogonal factor: modified Gram-Schmidt on the columns. The implied R
  // diagonal is the positive residual norm, so U is the unique QR factor
  // with positive R diagonal.
  Matrix u(d, d);
  for (int j = 0; j < d; ++j) {
    Vec col(size_t(d), 0.0);
    for (int i = 0; i < d; ++i) col[size_t(i)] = gauss(i, j);
    for (int p = 0; p < j; ++p) {
      double proj = 0.0;
      for (int i = 0; i < d; ++i) proj += u(i, p) * col[size_t(i)];
      for (int i = 0; i < d; ++i) col[size_t(i)] -= proj * u(i, p);
    }
    double nrm = vec_norm(col);
    if (nrm < 1e-12) throw NumericalError("make_system: degenerate random factor");
    for (int i = 0; i < d; ++i) u(i, j) = col[size_t(i)] / nrm;
  }

  Matrix a = matmul(u, matmul(Matrix::diagonal(lambda), transpose(u)));
  return make_system_from(a, sigma);
}

Trajectory simulate(const LtiSystem& system, int agent, long long horizon,
                    std::span<const double> x0, RngStream& rng, NoiseKind noise,
                    bool keep_noises) {
  if (horizon < 1) throw std::invalid_argument("simulate: horizon must be >= 1");
  const int d = system.dim;
  if (int(x0.size()) != d) throw std::invalid_argument("simulate: x0 dimension mismatch");

  Trajectory traj;
  traj.agent = agent;
  traj.dim = d;
  traj.horizon = horizon;
  traj.states.resize(size_t(horizon + 1) * d);
  if (keep_noises) traj.noises.resize(size_t(horizon) * d);

  std::copy(x0.begin(), x0.end(), traj.states.begin());
  Vec z(size_t(d), 0.0);
  Vec w(size_t(d), 0.0);
  for (long long t = 0; t < horizon; ++t) {
    draw_unit_noise(rng, noise, z);
    lower_tri_apply(system.sigma_chol, z, w);
    const double* xt = traj.states.data() + t * d;
    double* xn = traj.states.data() + (t + 1) * d;
    for (int i = 0; i < d; ++i) {
      double s = 0.0;
      for (int j = 0; j < d; ++j) s += system.a(i, j) * xt[j];
      xn[i] = s + w[size_t(i)];
    }
    if (keep_noises) std::copy(w.begin(), w.end(), traj.noises.begin() + t * d);
  }
  return traj;
}

Trajectory simulate_agent(const LtiSystem& system, int agent, long long horizon,
                          std::uint64_t seed, InitialStateMode x0_mode, NoiseKind noise,
                          bool keep_noises) {
  Vec x0(size_t(system.dim), 0.0);
  if (x0_mode == InitialStateMode::stationary) {
    RngStream init(seed, std::uint64_t(agent), StreamPurpose::initial_state);
    x0 = sample_stationary(system, init);
  }
  RngStream stream(seed, std::uint64_t(agent), StreamPurpose::noise);
  return simulate(system, agent, horizon, x0, stream, noise, keep_noises);
}

Vec sample_stationary(const LtiSystem& system, RngStream& rng) {
  Vec z(size_t(system.dim));
  rng.fill_normal(z);
  Vec x(size_t(system.dim));
  lower_tri_apply(system.g_chol, z, x);
  return x;
}

CoupledTrajectory make_coupled(const LtiSystem& system, const Trajectory& traj,
                               const BufferLayout& layout, RngStream& rng) {
  if (traj.dim != system.dim) throw std::invalid_argument("make_coupled: dimension mismatch");
  if (traj.noises.empty()) throw std::invalid_argument("make_coupled: trajectory lacks noises");
  const long long needed = layout.block * layout.buffer_count;
  if (traj.horizon < needed) throw std::invalid_argument("make_coupled: trajectory too short for layout");

  const int d = system.dim;
  const long long s_count = layout.block;
  CoupledTrajectory coupled;
  coupled.dim = d;
  coupled.block = s_count;
  coupled.buffers.resize(size_t(layout.buffer_count));
  for (long long t = 0; t < layout.buffer_count; ++t) {
    auto& buf = coupled.buffers[size_t(t)];
    buf.resize(size_t(s_count) * d);
    Vec start = sample_stationary(system, rng);
    std::copy(start.begin(), start.end(), buf.begin());
    for (long long i = 1; i < s_count; ++i) {
      const double* prev = buf.data() + (i - 1) * d;
      auto w = traj.noise(s_count * t + i - 1);
      double* cur = buf.data() + i * d;
      for (int r = 0; r < d; ++r) {
        double acc = 0.0;
        for (int c = 0; c < d; ++c) acc += system.a(r, c) * prev[c];
        cur[r] = acc + w[size_t(r)];
      }
    }
  }
  return coupled;
}

namespace {
constexpr char kTrajMagic[8] = {'L', 'T', 'I', 'T', 'R', 'A', 'J', '1'};
}

void save_trajectory(const Trajectory& traj, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("save_trajectory: cannot open " + path);
  out.write(kTrajMagic, 8);
  std::uint64_t header[3] = {std::uint64_t(traj.dim), std::uint64_t(traj.horizon),
                             std::uint64_t(traj.agent)};
  out.write(reinterpret_cast<const char*>(header), sizeof(header));
  out.write(reinterpret_cast<const char*>(traj.states.data()),
            std::streamsize(traj.states.size() * sizeof(double)));
  if (!out) throw std::runtime_error("save_trajectory: write failed for " + path);
}

Trajectory load_trajectory(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_trajectory: cannot open " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kTrajMagic, 8) != 0)
    throw std::runtime_error("load_trajectory: bad magic in " + path);
  std::uint64_t header[3];
  in.read(reinterpret_cast<char*>(header), sizeof(header));
  if (!in) throw std::runtime_error("load_trajectory: truncated header in " + path);
  Trajectory traj;
  traj.dim = int(header[0]);
  traj.horizon = (long long)(header[1]);
  traj.agent = int(header[2]);
  if (traj.dim < 1 || traj.horizon < 1)
    throw std::runtime_error("load_trajectory: invalid header in " + path);
  traj.states.resize(size_t(traj.horizon + 1) * traj.dim);
  in.read(reinterpret_cast<char*>(traj.states.data()),
          std::streamsize(traj.states.size() * sizeof(double)));
  if (!in) throw std::runtime_error("load_trajectory: truncated states in " + path);
  return traj;
}

}  // namespace netsysid
