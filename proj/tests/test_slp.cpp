#include <cmath>
#include <numbers>

#include "doctest.h"
#include "rissim/rng.hpp"
#include "rissim/slp.hpp"
#include "test_util.hpp"

using namespace rissim;
using namespace rissim::testutil;
using std::numbers::pi;
using cplx = std::complex<double>;

namespace {

std::vector<CiSpec> uniform_ci(int k, double sigma, double gamma, double phi) {
  return std::vector<CiSpec>(k, CiSpec{sigma, gamma, phi});
}

}  // namespace

TEST_CASE("ci_slack on axis-aligned points") {
  // symbol 1+0j, QPSK half-angle: slack = (Re(y) - sigma*sqrt(gamma)) - |Im(y)|
  CHECK(ci_slack({2.0, 0.0}, {1.0, 0.0}, 1.0, 1.0, pi / 4) == doctest::Approx(1.0));
  CHECK(ci_slack({1.0, 0.0}, {1.0, 0.0}, 1.0, 1.0, pi / 4) == doctest::Approx(0.0));
  CHECK(ci_slack({2.0, 1.5}, {1.0, 0.0}, 1.0, 1.0, pi / 4) == doctest::Approx(-0.5));
  // rotating into the symbol frame: y on the symbol ray
  CHECK(ci_slack({0.0, 3.0}, {0.0, 1.0}, 1.0, 4.0, pi / 4) == doctest::Approx(1.0));
}

TEST_CASE("ci_slack is invariant under joint rotation of y and symbol") {
  const cplx y{1.7, 0.4};
  const cplx s{1.0, 0.0};
  const double base = ci_slack(y, s, 0.5, 2.0, pi / 8);
  for (double a : {0.3, 1.1, 2.9, -2.0}) {
    const cplx rot = std::polar(1.0, a);
    CHECK(ci_slack(y * rot, s * rot, 0.5, 2.0, pi / 8) == doctest::Approx(base));
  }
}

TEST_CASE("wider half-angle never shrinks the slack") {
  const cplx y{1.4, 0.6};
  const cplx s{1.0, 0.0};
  double prev = ci_slack(y, s, 1.0, 1.0, 0.1);
  for (double phi : {0.3, 0.6, 1.0, 1.4}) {
    const double cur = ci_slack(y, s, 1.0, 1.0, phi);
    CHECK(cur >= prev - 1e-12);
    prev = cur;
  }
}

TEST_CASE("single user on the constraint boundary") {
  // scalar channel 1, symbol e^{j pi/4}, sigma=1, gamma=1, QPSK: the cheapest
  // x is the symbol itself, power exactly 1
  cmat rows(1, 1);
  rows(0, 0) = 1.0;
  cvec sym(1);
  sym(0) = std::polar(1.0, pi / 4);
  SlpSolution sol = slp_min_power(rows, sym, uniform_ci(1, 1.0, 1.0, pi / 4));
  CHECK(sol.power == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::abs(sol.x(0) - sym(0)) < 1e-4);
  CHECK(sol.slack.minCoeff() > -1e-6);
  CHECK(sol.kkt_residual < 1e-6);
}

TEST_CASE("identity channel with two users decouples") {
  cmat rows = cmat::Identity(2, 2);
  cvec sym(2);
  sym(0) = 1.0;
  sym(1) = cplx{0.0, 1.0};
  SlpSolution sol = slp_min_power(rows, sym, uniform_ci(2, 1.0, 1.0, pi / 4));
  CHECK(sol.power == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(std::abs(sol.x(0) - sym(0)) < 1e-4);
  CHECK(std::abs(sol.x(1) - sym(1)) < 1e-4);
}

TEST_CASE("scaling the target scales the solution amplitude") {
  cmat rows(1, 2);
  rows(0, 0) = cplx{0.6, 0.3};
  rows(0, 1) = cplx{-0.2, 0.9};
  cvec sym(1);
  sym(0) = 1.0;
  SlpSolution a = slp_min_power(rows, sym, uniform_ci(1, 1.0, 1.0, pi / 4));
  SlpSolution b = slp_min_power(rows, sym, uniform_ci(1, 1.0, 4.0, pi / 4));
  CHECK(b.power == doctest::Approx(4.0 * a.power).epsilon(1e-5));
}

TEST_CASE("zero channel row is infeasible") {
  cmat rows = cmat::Zero(2, 3);
  rows.row(0).setOnes();
  cvec sym = cvec::Ones(2);
  CHECK_THROWS_AS(slp_min_power(rows, sym, uniform_ci(2, 1.0, 1.0, pi / 4)), Infeasible);
}

TEST_CASE("symbol-level power never exceeds the per-slot ZF cost") {
  for (uint64_t seed = 0; seed < 8; ++seed) {
    Scenario s = small_scenario(4, 3, {}, FeasibilityKind::kContinuousPhase, 2, seed);
    ChannelSet ch = synthesize_channels(s, 0);
    Prng rng(seed + 100);
    cvec sym(3);
    std::vector<CiSpec> ci;
    for (int k = 0; k < 3; ++k) {
      sym(k) = std::polar(1.0, 2.0 * pi * rng.below(4) / 4.0 + pi / 4);
      ci.push_back(CiSpec{std::sqrt(s.terminals[k].noise_power),
                          s.terminals[k].sinr_target, pi / 4});
    }
    SlpSolution sol = slp_min_power(ch.direct, sym, ci);
    CHECK(sol.slack.minCoeff() > -1e-6);
    CHECK(sol.kkt_residual < 1e-6);

    // ZF reference: x = pinv(H) * diag(sigma*sqrt(gamma)) * s meets every
    // constraint with zero slack, so the optimum cannot cost more
    Eigen::CompleteOrthogonalDecomposition<cmat> cod(ch.direct);
    cvec target(3);
    for (int k = 0; k < 3; ++k) target(k) = ci[k].sigma * std::sqrt(ci[k].gamma) * sym(k);
    const double zf_power = cod.solve(target).squaredNorm();
    CHECK(sol.power <= zf_power + 1e-8);
  }
}

TEST_CASE("solve_slp with fixed unit configs matches the raw QP") {
  Scenario s = small_scenario(4, 2, {6}, FeasibilityKind::kContinuousPhase, 2, 17);
  ChannelSet ch = synthesize_channels(s, 0);
  auto cfgs = unit_configs(s);
  cvec sym(2);
  sym(0) = std::polar(1.0, pi / 4);
  sym(1) = std::polar(1.0, 3 * pi / 4);
  SolverParams params;
  SlpSolution fixed = solve_slp(ch, s, sym, &cfgs, params);

  cmat rows = composite_channel(ch, cfgs);
  std::vector<CiSpec> ci;
  for (int k = 0; k < 2; ++k) {
    ci.push_back(CiSpec{std::sqrt(s.terminals[k].noise_power),
                        s.terminals[k].sinr_target,
                        s.terminals[k].constellation.ci_half_angle});
  }
  SlpSolution raw = slp_min_power(rows, sym, ci);
  CHECK(fixed.power == doctest::Approx(raw.power).epsilon(1e-9));
}

TEST_CASE("freeing the reflection never raises the transmit power") {
  for (uint64_t seed = 0; seed < 5; ++seed) {
    Scenario s = small_scenario(4, 2, {8}, FeasibilityKind::kDiscretePhase, 4, seed);
    ChannelSet ch = synthesize_channels(s, 0);
    auto cfgs = unit_configs(s);
    for (auto& c : cfgs) c.theta = project(c.theta, c.feasibility);
    cvec sym(2);
    sym(0) = std::polar(1.0, pi / 4);
    sym(1) = std::polar(1.0, -pi / 4);
    SolverParams params;
    SlpSolution fixed = solve_slp(ch, s, sym, &cfgs, params);
    SlpSolution free_theta = solve_slp(ch, s, sym, nullptr, params);
    CHECK(free_theta.power <= fixed.power + 1e-9);
    for (const auto& c : free_theta.configs) CHECK(c.is_feasible(1e-9));
  }
}

TEST_CASE("all-symbols sweep: BPSK columns are sign-symmetric") {
  Scenario s = small_scenario(2, 1, {}, FeasibilityKind::kContinuousPhase, 2, 3);
  s.terminals[0].constellation = Constellation::psk(2);
  ChannelSet ch = synthesize_channels(s, 0);
  SolverParams params;
  SlpSolution sol = solve_slp_all_symbols(ch, s, params);
  REQUIRE(sol.all_x.cols() == 2);
  CHECK((sol.all_x.col(0) + sol.all_x.col(1)).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(sol.power == doctest::Approx(sol.all_x.squaredNorm()));
}

TEST_CASE("all-symbols combinatorial cap") {
  Scenario s = small_scenario(4, 3, {}, FeasibilityKind::kContinuousPhase, 2, 3);
  for (auto& t : s.terminals) t.constellation = Constellation::psk(8);
  ChannelSet ch = synthesize_channels(s, 0);
  SolverParams params;
  // 8^3 = 512 <= 4096 runs; 16^3 = 4096 still runs; 16^3 > 512 cap throws
  CHECK_NOTHROW(solve_slp_all_symbols(ch, s, params));
  for (auto& t : s.terminals) t.constellation = Constellation::psk(16);
  CHECK_NOTHROW(solve_slp_all_symbols(ch, s, params, nullptr, 4096));
  CHECK_THROWS_AS(solve_slp_all_symbols(ch, s, params, nullptr, 512), CombinatorialCap);
}

TEST_CASE("all-symbols worst slack stays feasible") {
  Scenario s = small_scenario(4, 2, {4}, FeasibilityKind::kDiscretePhase, 2, 29);
  ChannelSet ch = synthesize_channels(s, 0);
  SolverParams params;
  SlpSolution sol = solve_slp_all_symbols(ch, s, params);
  CHECK(sol.slack.minCoeff() > -1e-6);
  CHECK(sol.all_x.cols() == 16);  // 4^2 symbol tuples
}
