#pragma once

#include <string>
#include <vector>

#include "netsysid/matrix.hpp"

namespace netsysid {

/// Validated symmetric doubly stochastic mixing matrix with its
/// second-largest singular value beta and per-agent neighbor lists.
struct Topology {
  int m = 0;
  Matrix p;
  double beta = 0.0;
  std::vector<std::vector<int>> neighbors;  // N_k = { j : P[j][k] > 0 }
};

struct TopologySpec {
  enum class Kind { identity, cyclic, complete, custom };
  Kind kind = Kind::complete;
  int degree = 2;           // cyclic only
  double self_weight = 0.3; // cyclic only
  Matrix custom;            // custom only
};

/// Builds and validates a topology. Checks: symmetry, nonnegativity, row
/// and column sums (1e-12), positive diagonal, connectivity, beta range.
/// The builtin identity kind skips only the connectivity check (it models a
/// deliberately communication-free network); custom matrices must satisfy
/// every invariant and failures name the violated check.
Topology make_topology(const TopologySpec& spec, int m);

/// Parses a custom mixing matrix from a text file: first line m, then m
/// whitespace-separated rows. Validated via the custom path.
Topology load_topology_file(const std::string& path);

/// Worst ratio of the consensus deviation sum_j |[P^k]_{ji} - 1/m| to the
/// geometric envelope sqrt(m) * beta^k over k = 1..k_max and all columns i.
/// A valid topology stays <= 1 + 1e-9. Returns 0 by convention when
/// beta = 0 (the deviation is identically zero).
double mixing_bound_check(const Topology& t, int k_max);

/// One gossip round: output[k] = sum_j P[j][k] * estimates[j], accumulated
/// in ascending j so results do not depend on scheduling.
std::vector<Matrix> gossip_mix(const Topology& t, const std::vector<Matrix>& estimates);

/// Buffer-reusing variant for hot loops; identical arithmetic.
void gossip_mix_into(const Topology& t, const std::vector<Matrix>& estimates,
                     std::vector<Matrix>& out);

}  // namespace netsysid
