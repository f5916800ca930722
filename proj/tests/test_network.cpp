#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "netsysid/network.hpp"
#include "netsysid/rng.hpp"

using namespace netsysid;

namespace {

Topology ring5() { return make_topology({TopologySpec::Kind::cyclic, 2, 0.3, {}}, 5); }

std::vector<Matrix> random_estimates(int m, int d, RngStream& rng) {
  std::vector<Matrix> out(size_t(m), Matrix(d, d));
  for (Matrix& e : out)
    for (double& v : e.data()) v = rng.next_normal();
  return out;
}

Matrix column_mean(const std::vector<Matrix>& est) {
  Matrix mean(est[0].rows(), est[0].cols());
  for (const Matrix& e : est) add_in_place(mean, e);
  return scaled(mean, 1.0 / double(est.size()));
}

}  // namespace

TEST_SUITE("network") {

TEST_CASE("identity network keeps everyone isolated") {
  Topology t = make_topology({TopologySpec::Kind::identity, 2, 0.3, {}}, 5);
  CHECK(t.m == 5);
  CHECK(t.beta == doctest::Approx(1.0).epsilon(1e-12));
  for (int i = 0; i < 5; ++i) CHECK(t.neighbors[size_t(i)] == std::vector<int>{i});
}

TEST_CASE("a single agent has no consensus direction at all") {
  Topology t = make_topology({TopologySpec::Kind::identity, 2, 0.3, {}}, 1);
  CHECK(t.beta == 0.0);
  CHECK(mixing_bound_check(t, 10) == 0.0);
}

TEST_CASE("ring of five: weights and the circulant second singular value") {
  Topology t = ring5();
  CHECK(t.p(0, 0) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(t.p(0, 1) == doctest::Approx(0.35).epsilon(1e-15));
  CHECK(t.p(0, 4) == doctest::Approx(0.35).epsilon(1e-15));
  CHECK(t.p(0, 2) == 0.0);
  // 0.3 + 0.7 cos(2 pi / 5), the largest non-principal circulant eigenvalue.
  CHECK(t.beta == doctest::Approx(0.5163118960624632).epsilon(1e-12));
}

TEST_CASE("complete network averages in one round and has beta = 0") {
  Topology t = make_topology({TopologySpec::Kind::complete, 2, 0.3, {}}, 5);
  CHECK(t.beta == 0.0);
  RngStream rng(3, 0, StreamPurpose::replica);
  auto est = random_estimates(5, 3, rng);
  auto mixed = gossip_mix(t, est);
  // All agents agree bitwise: every output runs the same ascending
  // accumulation with identical weights.
  for (int k = 1; k < 5; ++k)
    CHECK(max_abs(sub(mixed[size_t(k)], mixed[0])) == 0.0);
}

TEST_CASE("cyclic construction rejects bad shapes") {
  CHECK_THROWS_AS(make_topology({TopologySpec::Kind::cyclic, 2, 0.3, {}}, 2),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_topology({TopologySpec::Kind::cyclic, 3, 0.3, {}}, 5),
                  std::invalid_argument);  // odd degree
  CHECK_THROWS_AS(make_topology({TopologySpec::Kind::cyclic, 6, 0.3, {}}, 5),
                  std::invalid_argument);  // degree >= m
  CHECK_THROWS_AS(make_topology({TopologySpec::Kind::cyclic, 2, 1.0, {}}, 5),
                  std::invalid_argument);  // self weight out of range
}

TEST_CASE("custom matrices are validated check by check") {
  TopologySpec spec;
  spec.kind = TopologySpec::Kind::custom;

  spec.custom = Matrix::from_rows({{0.5, 0.5}, {0.4, 0.6}});
  CHECK_THROWS_WITH_AS(make_topology(spec, 2), "topology: not symmetric", std::invalid_argument);

  spec.custom = Matrix::from_rows({{1.5, -0.5}, {-0.5, 1.5}});
  CHECK_THROWS_WITH_AS(make_topology(spec, 2), "topology: negative entry", std::invalid_argument);

  spec.custom = Matrix::from_rows({{0.4, 0.4}, {0.4, 0.4}});
  CHECK_THROWS_WITH_AS(make_topology(spec, 2), "topology: row sum not 1", std::invalid_argument);

  spec.custom = Matrix::from_rows({{0.0, 1.0}, {1.0, 0.0}});
  CHECK_THROWS_WITH_AS(make_topology(spec, 2), "topology: diagonal entry not positive",
                       std::invalid_argument);

  spec.custom = Matrix::from_rows({{1.0, 0.0}, {0.0, 1.0}});
  CHECK_THROWS_WITH_AS(make_topology(spec, 2), "topology: network not connected",
                       std::invalid_argument);

  spec.custom = Matrix::from_rows({{0.6, 0.4}, {0.4, 0.6}});
  Topology valid = make_topology(spec, 2);
  CHECK(valid.beta == doctest::Approx(0.2).epsilon(1e-10));
}

TEST_CASE("topology files load through the same validation") {
  namespace fs = std::filesystem;
  fs::path dir = fs::path("test_tmp") / "nets";
  fs::remove_all(dir);
  fs::create_directories(dir);
  fs::path good = dir / "pair.txt";
  std::ofstream(good.string()) << "2\n0.6 0.4\n0.4 0.6\n";
  Topology t = load_topology_file(good.string());
  CHECK(t.m == 2);
  CHECK(t.p(0, 1) == doctest::Approx(0.4).epsilon(1e-15));

  fs::path bad = dir / "bad.txt";
  std::ofstream(bad.string()) << "2\n0.6 0.4\n";
  CHECK_THROWS(load_topology_file(bad.string()));
  CHECK_THROWS(load_topology_file((dir / "missing.txt").string()));
}

TEST_CASE("consensus deviation obeys the geometric envelope") {
  for (int kind = 0; kind < 3; ++kind) {
    TopologySpec spec;
    spec.kind = kind == 0   ? TopologySpec::Kind::identity
                : kind == 1 ? TopologySpec::Kind::cyclic
                            : TopologySpec::Kind::complete;
    spec.degree = 2;
    spec.self_weight = 0.3;
    Topology t = make_topology(spec, 5);
    CHECK(mixing_bound_check(t, 20) <= 1.0 + 1e-9);
  }
}

TEST_CASE("gossip preserves the network average to rounding") {
  Topology t = ring5();
  RngStream rng(17, 0, StreamPurpose::replica);
  for (int rep = 0; rep < 10; ++rep) {
    auto est = random_estimates(5, 4, rng);
    auto mixed = gossip_mix(t, est);
    CHECK(max_abs(sub(column_mean(est), column_mean(mixed))) <= 1e-12);
  }
}

TEST_CASE("one gossip round contracts disagreement by beta") {
  Topology t = ring5();
  RngStream rng(29, 0, StreamPurpose::replica);
  for (int rep = 0; rep < 5; ++rep) {
    auto est = random_estimates(5, 3, rng);
    Matrix mean = column_mean(est);
    auto mixed = gossip_mix(t, est);
    double before = 0.0, after = 0.0;
    for (int k = 0; k < 5; ++k) {
      double b = frobenius_norm(sub(est[size_t(k)], mean));
      double a = frobenius_norm(sub(mixed[size_t(k)], mean));
      before += b * b;
      after += a * a;
    }
    CHECK(std::sqrt(after) <= t.beta * std::sqrt(before) * (1.0 + 1e-9));
  }
}

TEST_CASE("gossip rejects mismatched inputs") {
  Topology t = ring5();
  std::vector<Matrix> wrong_count(4, Matrix(2, 2));
  CHECK_THROWS_AS(gossip_mix(t, wrong_count), std::invalid_argument);
  std::vector<Matrix> wrong_shape(5, Matrix(2, 2));
  wrong_shape[3] = Matrix(3, 2);
  CHECK_THROWS_AS(gossip_mix(t, wrong_shape), std::invalid_argument);
}

TEST_CASE("gossip on a hand-checked 3-agent kernel") {
  TopologySpec spec;
  spec.kind = TopologySpec::Kind::custom;
  spec.custom = Matrix::from_rows({{0.4, 0.3, 0.3}, {0.3, 0.4, 0.3}, {0.3, 0.3, 0.4}});
  Topology t = make_topology(spec, 3);
  std::vector<Matrix> est = {Matrix::from_rows({{1.0}}), Matrix::from_rows({{2.0}}),
                             Matrix::from_rows({{3.0}})};
  auto mixed = gossip_mix(t, est);
  CHECK(mixed[0](0, 0) == doctest::Approx(1.9).epsilon(1e-15));
  CHECK(mixed[1](0, 0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(mixed[2](0, 0) == doctest::Approx(2.1).epsilon(1e-15));
}

}  // TEST_SUITE
