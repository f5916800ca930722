#include "netsysid/network.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace netsysid {

namespace {

void validate_mixing_matrix(const Matrix& p, bool require_connected) {
  const int m = p.rows();
  if (p.cols() != m) throw std::invalid_argument("topology: mixing matrix not square");
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      if (p(i, j) < 0.0) throw std::invalid_argument("topology: negative entry");
      if (std::fabs(p(i, j) - p(j, i)) > 1e-12) throw std::invalid_argument("topology: not symmetric");
    }
  for (int i = 0; i < m; ++i) {
    double row = 0.0, col = 0.0;
    for (int j = 0; j < m; ++j) {
      row += p(i, j);
      col += p(j, i);
    }
    if (std::fabs(row - 1.0) > 1e-12) throw std::invalid_argument("topology: row sum not 1");
    if (std::fabs(col - 1.0) > 1e-12) throw std::invalid_argument("topology: column sum not 1");
  }
  for (int i = 0; i < m; ++i)
    if (p(i, i) <= 0.0) throw std::invalid_argument("topology: diagonal entry not positive");
  if (require_connected) {
    // Reachability within m hops; equivalent to P + P^2 + ... + P^m all
    // positive for a nonnegative matrix with positive diagonal.
    std::vector<char> reached(size_t(m), 0);
    std::vector<int> frontier{0};
    reached[0] = 1;
    while (!frontier.empty()) {
      int v = frontier.back();
      frontier.pop_back();
      for (int j = 0; j < m; ++j)
        if (p(v, j) > 0.0 && !reached[size_t(j)]) {
          reached[size_t(j)] = 1;
          frontier.push_back(j);
        }
    }
    for (int i = 0; i < m; ++i)
      if (!reached[size_t(i)]) throw std::invalid_argument("topology: network not connected");
  }
}

Topology finish_topology(Matrix p, bool require_connected) {
  validate_mixing_matrix(p, require_connected);
  Topology t;
  t.m = p.rows();
  t.neighbors.resize(size_t(t.m));
  for (int k = 0; k < t.m; ++k)
    for (int j = 0; j < t.m; ++j)
      if (p(j, k) > 0.0) t.neighbors[size_t(k)].push_back(j);
  if (t.m == 1) {
    t.beta = 0.0;  // single agent: no second singular value; consensus is a non-event
  } else {
    Vec sv = singular_values(p);
    t.beta = std::min(1.0, std::max(0.0, sv[1]));
  }
  t.p = std::move(p);
  return t;
}

}  // namespace

Topology make_topology(const TopologySpec& spec, int m) {
  if (spec.kind != TopologySpec::Kind::custom && m < 1)
    throw std::invalid_argument("topology: m must be >= 1");
  switch (spec.kind) {
    case TopologySpec::Kind::identity:
      return finish_topology(Matrix::identity(m), /*require_connected=*/false);
    case TopologySpec::Kind::complete: {
      Matrix p(m, m);
      for (double& v : p.data()) v = 1.0 / double(m);
      return finish_topology(std::move(p), true);
    }
    case TopologySpec::Kind::cyclic: {
      if (m < 3) throw std::invalid_argument("topology: cyclic needs m >= 3");
      if (spec.degree < 2 || spec.degree % 2 != 0 || spec.degree > m - 1)
        throw std::invalid_argument("topology: cyclic degree must be even and < m");
      if (spec.self_weight <= 0.0 || spec.self_weight >= 1.0)
        throw std::invalid_argument("topology: cyclic self weight must be in (0,1)");
      double w = (1.0 - spec.self_weight) / double(spec.degree);
      Matrix p(m, m);
      for (int i = 0; i < m; ++i) {
        p(i, i) += spec.self_weight;
        for (int o = 1; o <= spec.degree / 2; ++o) {
          p(i, (i + o) % m) += w;
          p(i, (i - o + m) % m) += w;
        }
      }
      return finish_topology(std::move(p), true);
    }
    case TopologySpec::Kind::custom:
      return finish_topology(spec.custom, true);
  }
  throw std::invalid_argument("topology: unknown kind");
}

Topology load_topology_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("topology file: cannot open " + path);
  int m = 0;
  if (!(in >> m) || m < 1) throw std::runtime_error("topology file: bad agent count in " + path);
  Matrix p(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      if (!(in >> p(i, j)))
        throw std::runtime_error("topology file: truncated matrix in " + path);
  TopologySpec spec;
  spec.kind = TopologySpec::Kind::custom;
  spec.custom = std::move(p);
  return make_topology(spec, m);
}

double mixing_bound_check(const Topology& t, int k_max) {
  if (k_max < 1) throw std::invalid_argument("mixing_bound_check: k_max must be >= 1");
  if (t.beta == 0.0) return 0.0;
  const int m = t.m;
  const double uniform = 1.0 / double(m);
  const double root_m = std::sqrt(double(m));
  Matrix pk = t.p;
  double worst = 0.0;
  double envelope = t.beta;
  for (int k = 1; k <= k_max; ++k) {
    for (int i = 0; i < m; ++i) {
      double dev = 0.0;
      for (int j = 0; j < m; ++j) dev += std::fabs(pk(j, i) - uniform);
      worst = std::max(worst, dev / (root_m * envelope));
    }
    if (k < k_max) {
      pk = matmul(pk, t.p);
      envelope *= t.beta;
    }
  }
  return worst;
}

void gossip_mix_into(const Topology& t, const std::vector<Matrix>& estimates,
                     std::vector<Matrix>& out) {
  const int m = t.m;
  if (int(estimates.size()) != m) throw std::invalid_argument("gossip_mix: estimate count mismatch");
  for (int j = 1; j < m; ++j)
    if (!estimates[size_t(j)].same_shape(estimates[0]))
      throw std::invalid_argument("gossip_mix: estimate shape mismatch");
  out.resize(size_t(m));
  const size_t n = estimates[0].data().size();
  for (int k = 0; k < m; ++k) {
    Matrix& acc = out[size_t(k)];
    if (!acc.same_shape(estimates[0])) acc = Matrix(estimates[0].rows(), estimates[0].cols());
    auto ad = acc.data();
    std::fill(ad.begin(), ad.end(), 0.0);
    for (int j = 0; j < m; ++j) {
      double w = t.p(j, k);
      if (w == 0.0) continue;
      auto ed = estimates[size_t(j)].data();
      for (size_t idx = 0; idx < n; ++idx) ad[idx] += w * ed[idx];
    }
  }
}

std::vector<Matrix> gossip_mix(const Topology& t, const std::vector<Matrix>& estimates) {
  std::vector<Matrix> out;
  gossip_mix_into(t, estimates, out);
  return out;
}

}  // namespace netsysid
