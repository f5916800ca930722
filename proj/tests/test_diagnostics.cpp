#include <cmath>
#include <vector>

#include "doctest.h"
#include "netsysid/diagnostics.hpp"
#include "netsysid/rng.hpp"

using namespace netsysid;

TEST_SUITE("diagnostics") {

TEST_CASE("average step factor on two scalar states") {
  std::vector<Vec> states = {{1.0}, {2.0}};
  // 1 - (2 * 0.1 / 2) * (1 + 4) = 0.5
  Matrix f = average_step_factor(states, 0.1);
  CHECK(f(0, 0) == 0.5);
}

TEST_CASE("step products multiply earliest reverse index first") {
  std::vector<Matrix> factors = {Matrix::from_rows({{1, 1}, {0, 1}}),
                                 Matrix::from_rows({{1, 0}, {1, 1}}),
                                 Matrix::from_rows({{2, 0}, {0, 1}})};
  Matrix expect = matmul(matmul(factors[0], factors[1]), factors[2]);
  CHECK(max_abs(sub(h_product(factors, 0, 2), expect)) == 0.0);
  // Non-commuting pair: the reversed order must differ, which pins the
  // convention down.
  Matrix swapped = matmul(factors[1], factors[0]);
  CHECK(max_abs(sub(h_product(factors, 0, 1), swapped)) > 0.5);
  CHECK(max_abs(sub(h_product(factors, 2, 1), Matrix::identity(2))) == 0.0);
  CHECK_THROWS_AS(h_product(factors, 0, 3), std::invalid_argument);
}

TEST_CASE("contraction sandwich margins on the scalar hand oracle") {
  // One step, one agent, state 1, gamma 0.1, radius 1:
  //   H^T H = (1 - 0.2)^2 = 0.64,  e = 0.2 / 0.6 = 1/3,
  //   lower bound 1 - 0.4 * (4/3) = 7/15,  upper bound 1 - 0.4 * (2/3) = 11/15.
  std::vector<std::vector<Vec>> states = {{{1.0}}};
  auto [lo, hi] = contraction_margins(states, 0.1, 1.0);
  CHECK(lo == doctest::Approx(0.64 - 7.0 / 15.0).epsilon(1e-12));
  CHECK(hi == doctest::Approx(11.0 / 15.0 - 0.64).epsilon(1e-12));
}

TEST_CASE("contraction margins reject an oversized step budget") {
  std::vector<std::vector<Vec>> states = {{{1.0}}};
  CHECK_THROWS_AS(contraction_margins(states, 0.3, 1.0), std::invalid_argument);
}

TEST_CASE("single-agent contraction holds and survives shrinking the step") {
  // Small noise keeps every retained state well inside radius <= 2, where the
  // sandwich holds for any draw; the check cannot depend on sampling luck.
  LtiSystem sys = make_system_from(Matrix::from_rows({{0.5}}), Matrix::from_rows({{0.09}}));
  const long long B = 4;
  const double radius = 1.5;
  const double gamma = 0.2 / (double(B) * radius);
  McReport at_gamma = contraction_check(sys, 1, B, gamma, radius, 3, 20);
  CHECK(at_gamma.pass);
  CHECK(at_gamma.replicas == 20);
  CHECK(at_gamma.worst_margin >= -1e-9);
  // Shrinking gamma tenfold tightens nothing: the sandwich must keep holding.
  McReport at_tenth = contraction_check(sys, 1, B, gamma / 10.0, radius, 3, 20);
  CHECK(at_tenth.pass);
}

TEST_CASE("multi-agent contraction at the acceptance operating point") {
  LtiSystem sys = make_system(5, {0.9, 0.3}, Matrix::identity(5), 7);
  const long long B = 20;
  const double radius = 8.0;
  const double gamma = 0.2 / (double(B) * radius);
  McReport rep = contraction_check(sys, 3, B, gamma, radius, 31, 25);
  CHECK(rep.pass);
  CHECK(rep.replicas == 25);
}

TEST_CASE("an unreachable radius is an error, not a vacuous pass") {
  LtiSystem sys = make_system_from(Matrix::from_rows({{0.5}}), Matrix::from_rows({{1.0}}));
  CHECK_THROWS_AS(contraction_check(sys, 1, 4, 0.001, 1e-6, 3, 10), NumericalError);
}

TEST_CASE("reverse-order replay noise terms center on zero") {
  LtiSystem sys = make_system_from(Matrix::from_rows({{0.9}}), Matrix::from_rows({{1.0}}));
  McReport rep = unbiasedness_mc(sys, 20, 0.02, 2000, 97);
  CHECK(rep.pass);
  double rev = -1.0;
  for (const auto& [k, v] : rep.extra)
    if (k == "reverse_worst_ratio") rev = v;
  CHECK(rev >= 0.0);
  CHECK(rev <= 3.0);
}

TEST_CASE("with A = 0 both coupling terms are exactly unbiased") {
  LtiSystem sys = make_system_from(Matrix::from_rows({{0.0}}), Matrix::from_rows({{1.0}}));
  McReport rep = unbiasedness_mc(sys, 10, 0.05, 500, 11);
  CHECK(rep.pass);
}

TEST_CASE("with zero step size both coupling terms vanish identically") {
  LtiSystem sys = make_system_from(Matrix::from_rows({{0.9}}), Matrix::from_rows({{1.0}}));
  McReport rep = unbiasedness_mc(sys, 10, 0.0, 200, 5);
  CHECK(rep.pass);
  CHECK(max_abs(rep.mean) == 0.0);
}

TEST_CASE("unbiasedness preconditions") {
  LtiSystem sys = make_system_from(Matrix::from_rows({{0.5}}), Matrix::from_rows({{1.0}}));
  CHECK_THROWS_AS(unbiasedness_mc(sys, 10, 0.01, 50, 1), std::invalid_argument);
  CHECK_THROWS_AS(unbiasedness_mc(sys, 1, 0.01, 200, 1), std::invalid_argument);
}

TEST_CASE("reverse-term pass rate across independent master seeds") {
  LtiSystem sys = make_system_from(Matrix::from_rows({{0.9}}), Matrix::from_rows({{1.0}}));
  int passed = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed)
    if (unbiasedness_mc(sys, 50, 0.01, 10000, seed).pass) ++passed;
  CHECK(passed >= 50);  // >= 99% of 50 rounds up to all of them
}

TEST_CASE("scalar coupled gap tracks the power decay exactly") {
  LtiSystem sys = make_system_from(Matrix::from_rows({{0.5}}), Matrix::from_rows({{1.0}}));
  BufferLayout layout = plan_buffers(64, 6, 2);
  Trajectory traj = simulate_agent(sys, 0, 64, 9, InitialStateMode::zero,
                                   NoiseKind::gaussian, /*keep_noises=*/true);
  RngStream starts(9, 0, StreamPurpose::coupled_start);
  CoupledTrajectory coupled = make_coupled(sys, traj, layout, starts);
  double ratio = coupled_gap(sys, traj, coupled, layout);
  // In one dimension the gap recursion is the bound itself.
  CHECK(ratio == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("matrix coupled gap stays under the envelope") {
  LtiSystem sys = make_system(5, {0.9, 0.3}, Matrix::identity(5), 7);
  BufferLayout layout = plan_buffers(1000, 40, 10);
  Trajectory traj = simulate_agent(sys, 0, 1000, 11, InitialStateMode::zero,
                                   NoiseKind::gaussian, /*keep_noises=*/true);
  RngStream starts(11, 0, StreamPurpose::coupled_start);
  CoupledTrajectory coupled = make_coupled(sys, traj, layout, starts);
  CHECK(coupled_gap(sys, traj, coupled, layout) <= 1.0 + 1e-9);
}

TEST_CASE("error metric: spectral versus frobenius on a diagonal gap") {
  Matrix est = Matrix::from_rows({{3.0, 0.0}, {0.0, 4.0}});
  Matrix truth(2, 2);
  CHECK(error_metric(est, truth) == doctest::Approx(4.0).epsilon(1e-10));
  CHECK(error_metric(est, truth, MetricKind::frobenius) == 5.0);
}

}  // TEST_SUITE
