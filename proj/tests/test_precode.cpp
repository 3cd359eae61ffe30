#include <cmath>
#include <numbers>

#include "doctest.h"
#include "rissim/precode.hpp"
#include "rissim/rng.hpp"
#include "test_util.hpp"

using namespace rissim;
using namespace rissim::testutil;
using std::numbers::pi;

namespace {

// enumeration oracle for K=1 discrete instances: matched filter is the exact
// precoder per config, so enumerate the full phase grid
double brute_force_single_user(const ChannelSet& ch, const Scenario& s) {
  long total = 1;
  std::vector<int> radix;
  for (const auto& r : s.ris) {
    for (int q = 0; q < r.elements; ++q) {
      radix.push_back(r.feasibility.tau);
      total *= r.feasibility.tau;
    }
  }
  double best = 0;
  for (long code = 0; code < total; ++code) {
    long rem = code;
    std::vector<ReflectionConfig> cfgs;
    size_t pos = 0;
    for (const auto& r : s.ris) {
      cvec t(r.elements);
      for (int q = 0; q < r.elements; ++q) {
        const int m = static_cast<int>(rem % radix[pos]);
        rem /= radix[pos];
        ++pos;
        t(q) = std::polar(1.0, 2.0 * pi * m / r.feasibility.tau);
      }
      cfgs.push_back(ReflectionConfig{t, r.feasibility});
    }
    const cmat h = composite_channel(ch, cfgs);
    const double g = h.row(0).squaredNorm();
    const double obj =
        s.weights[0] * std::log2(1.0 + s.power_budget * g / s.terminals[0].noise_power);
    best = std::max(best, obj);
  }
  return best;
}

}  // namespace

TEST_CASE("sinr reduces to SNR for a single user") {
  Scenario s = small_scenario(4, 1, {});
  ChannelSet ch = synthesize_channels(s, 0);
  cmat p = mrt_precoder(ch, {}, 1.0);
  const std::complex<double> a = (ch.direct.row(0) * p.col(0))(0);
  CHECK(sinr(ch, {}, p, 0) ==
        doctest::Approx(std::norm(a) / s.terminals[0].noise_power));
}

TEST_CASE("zero interferers leave only noise in the denominator") {
  Scenario s = small_scenario(4, 2, {});
  ChannelSet ch = synthesize_channels(s, 0);
  cmat p = mrt_precoder(ch, {}, 1.0);
  p.col(1).setZero();
  const std::complex<double> a = (ch.direct.row(0) * p.col(0))(0);
  CHECK(sinr(ch, {}, p, 0) ==
        doctest::Approx(std::norm(a) / s.terminals[0].noise_power));
}

TEST_CASE("analytic sinr matches a simulated-reception estimate") {
  Scenario s = small_scenario(4, 2, {8}, FeasibilityKind::kContinuousPhase, 2, 11);
  ChannelSet ch = synthesize_channels(s, 0);
  auto cfgs = unit_configs(s);
  cmat p = mrt_precoder(ch, cfgs, 1.0);
  const double analytic = sinr(ch, cfgs, p, 0);

  const cmat h = composite_channel(ch, cfgs);
  const Eigen::RowVectorXcd a = h.row(0) * p;
  Prng rng(123);
  double sig = 0, rest = 0;
  const int trials = 200000;
  const double sigma = std::sqrt(s.terminals[0].noise_power);
  for (int i = 0; i < trials; ++i) {
    std::complex<double> y = 0;
    std::complex<double> want = 0;
    for (int k = 0; k < 2; ++k) {
      const std::complex<double> sym = std::polar(1.0, 2.0 * pi * rng.below(4) / 4.0);
      y += a(k) * sym;
      if (k == 0) want = a(0) * sym;
    }
    y += sigma * rng.cgaussian();
    sig += std::norm(want);
    rest += std::norm(y - want);
  }
  CHECK(std::abs(sig / rest - analytic) / analytic < 0.02);
}

TEST_CASE("weighted sum rate basics") {
  Scenario s = small_scenario(4, 2, {});
  ChannelSet ch = synthesize_channels(s, 0);
  const cmat zero = cmat::Zero(4, 2);
  CHECK(weighted_sum_rate(ch, {}, zero, s.weights) == 0.0);

  cmat p = mrt_precoder(ch, {}, 1.0);
  const double base = weighted_sum_rate(ch, {}, p, s.weights);
  CHECK(weighted_sum_rate(ch, {}, p, {3.0, 3.0}) == doctest::Approx(3.0 * base));
}

TEST_CASE("single user with unit SINR gives exactly one bit") {
  Scenario s = small_scenario(1, 1, {});
  s.terminals[0].noise_power = 1.0;
  ChannelSet ch = synthesize_channels(s, 0);
  ch.direct(0, 0) = 1.0;
  cmat p(1, 1);
  p(0, 0) = 1.0;  // gamma = 1
  CHECK(weighted_sum_rate(ch, {}, p, {1.0}) == doctest::Approx(1.0));
}

TEST_CASE("mrt precoder conjugate-matches and normalizes") {
  Scenario s = small_scenario(2, 1, {});
  ChannelSet ch = synthesize_channels(s, 0);
  ch.direct(0, 0) = 2.0;
  ch.direct(0, 1) = 0.0;
  cmat p = mrt_precoder(ch, {}, 1.0);
  CHECK(std::abs(p(0, 0) - 1.0) < 1e-14);
  CHECK(std::abs(p(1, 0)) < 1e-14);

  ch.direct(0, 0) = 1.0;
  ch.direct(0, 1) = {0.0, 1.0};
  p = mrt_precoder(ch, {}, 1.0);
  CHECK(std::abs(p(0, 0) - 1.0 / std::sqrt(2.0)) < 1e-14);
  CHECK(std::abs(p(1, 0) - std::complex<double>(0, -1.0 / std::sqrt(2.0))) < 1e-14);

  ch.direct.setZero();
  CHECK_THROWS_AS(mrt_precoder(ch, {}, 1.0), ZeroChannel);
}

TEST_CASE("zf precoder inverts the channel") {
  Scenario s = small_scenario(2, 2, {});
  ChannelSet ch = synthesize_channels(s, 0);
  ch.direct = cmat::Identity(2, 2);
  cmat p = zf_precoder(ch, {}, 2.0);
  CHECK((p - cmat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);

  ch.direct.row(1) = ch.direct.row(0);  // rank deficient
  CHECK_THROWS_AS(zf_precoder(ch, {}, 2.0), RankDeficient);
}

TEST_CASE("zf residual interference is negligible on a full-rank instance") {
  Scenario s = small_scenario(4, 2, {}, FeasibilityKind::kContinuousPhase, 2, 5);
  ChannelSet ch = synthesize_channels(s, 0);
  cmat p = zf_precoder(ch, {}, 1.0);
  cmat prod = ch.direct * p;
  prod.diagonal().setZero();
  CHECK(prod.cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("solve_wsr matches the coherent-combining closed form (K=1, LoS)") {
  for (uint64_t seed : {1u, 2u, 3u}) {
    Scenario s = small_scenario(1, 1, {6}, FeasibilityKind::kContinuousPhase, 2, seed);
    ChannelSet ch = synthesize_channels(s, 0);
    SolverParams params;
    params.restarts = 2;
    PrecodeSolution sol = solve_wsr(ch, s, params);

    double amp = std::abs(ch.direct(0, 0));
    for (int q = 0; q < 6; ++q) {
      amp += std::abs(ch.ris_user[0](0, q) * ch.bs_ris[0](q, 0));
    }
    const double expect =
        std::log2(1.0 + s.power_budget * amp * amp / s.terminals[0].noise_power);
    CHECK(std::abs(sol.objective - expect) / expect < 1e-6);
  }
}

TEST_CASE("solve_wsr equals exhaustive search on tiny discrete instances") {
  for (uint64_t seed = 0; seed < 5; ++seed) {
    Scenario s = small_scenario(1, 1, {4}, FeasibilityKind::kDiscretePhase, 2, seed);
    ChannelSet ch = synthesize_channels(s, 0);
    SolverParams params;
    params.restarts = 1;
    PrecodeSolution sol = solve_wsr(ch, s, params);
    CHECK(std::abs(sol.objective - brute_force_single_user(ch, s)) < 1e-12);
  }
}

TEST_CASE("zero power budget yields zero rate and zero precoder") {
  Scenario s = small_scenario(2, 2, {4});
  s.power_budget = 0.0;
  ChannelSet ch = synthesize_channels(s, 0);
  SolverParams params;
  params.restarts = 1;
  params.max_outer_iters = 5;
  PrecodeSolution sol = solve_wsr(ch, s, params);
  CHECK(sol.objective == 0.0);
  CHECK(sol.precoder.norm() == 0.0);
}

TEST_CASE("solve_wsr trace is nondecreasing and solution feasible") {
  Scenario s = small_scenario(4, 2, {8, 4}, FeasibilityKind::kDiscretePhase, 4, 21);
  ChannelSet ch = synthesize_channels(s, 0);
  SolverParams params;
  params.restarts = 2;
  params.max_outer_iters = 30;
  PrecodeSolution sol = solve_wsr(ch, s, params);
  for (size_t i = 1; i < sol.iterate_trace.size(); ++i) {
    CHECK(sol.iterate_trace[i] >= sol.iterate_trace[i - 1] - 1e-9);
  }
  CHECK(sol.precoder.squaredNorm() <= s.power_budget + 1e-9);
  for (const auto& c : sol.configs) CHECK(c.is_feasible(1e-9));
  CHECK(sol.objective ==
        doctest::Approx(weighted_sum_rate(ch, sol.configs, sol.precoder, s.weights)));
}

TEST_CASE("uniform weight scaling leaves the argmax unchanged") {
  Scenario s = small_scenario(4, 2, {6}, FeasibilityKind::kContinuousPhase, 2, 9);
  ChannelSet ch = synthesize_channels(s, 0);
  SolverParams params;
  params.restarts = 1;
  params.max_outer_iters = 15;
  PrecodeSolution a = solve_wsr(ch, s, params);
  Scenario s2 = s;
  s2.weights = {2.5, 2.5};
  PrecodeSolution b = solve_wsr(ch, s2, params);
  CHECK((a.precoder - b.precoder).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((a.configs[0].theta - b.configs[0].theta).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(b.objective == doctest::Approx(2.5 * a.objective));
}

TEST_CASE("identity clustering reproduces the unclustered objective") {
  Scenario s = small_scenario(2, 1, {4}, FeasibilityKind::kDiscretePhase, 2, 13);
  ChannelSet ch = synthesize_channels(s, 0);
  SolverParams params;
  params.restarts = 1;
  PrecodeSolution plain = solve_wsr(ch, s, params);
  std::vector<Clustering> cls = {Clustering::contiguous(4, 4)};
  PrecodeSolution clus = solve_wsr_clustered(ch, s, cls, params);
  CHECK(std::abs(plain.objective - clus.objective) < 1e-9);
}

TEST_CASE("single shared coefficient cancels an antisymmetric cascade") {
  Scenario s = small_scenario(1, 1, {2}, FeasibilityKind::kDiscretePhase, 2, 1);
  ChannelSet ch = synthesize_channels(s, 0);
  ch.direct(0, 0) = 0.5;
  ch.bs_ris[0](0, 0) = 1.0;
  ch.bs_ris[0](1, 0) = 1.0;
  ch.ris_user[0](0, 0) = 1.0;
  ch.ris_user[0](0, 1) = -1.0;  // cascaded coefficients +1 and -1
  SolverParams params;
  params.restarts = 1;
  std::vector<Clustering> cls = {Clustering::contiguous(2, 1)};
  PrecodeSolution sol = solve_wsr_clustered(ch, s, cls, params);
  const double direct_only =
      std::log2(1.0 + s.power_budget * 0.25 / s.terminals[0].noise_power);
  CHECK(sol.objective == doctest::Approx(direct_only));
}

TEST_CASE("clustering never helps: R=1 vs identity on random seeds") {
  for (uint64_t seed = 0; seed < 10; ++seed) {
    Scenario s = small_scenario(2, 2, {6}, FeasibilityKind::kDiscretePhase, 4, seed);
    ChannelSet ch = synthesize_channels(s, 0);
    SolverParams params;
    params.restarts = 2;
    params.max_outer_iters = 25;
    std::vector<Clustering> one = {Clustering::contiguous(6, 1)};
    PrecodeSolution clustered = solve_wsr_clustered(ch, s, one, params);
    // warm start from the expanded clustered solution keeps the ordering exact
    PrecodeSolution plain = solve_wsr(ch, s, params, &clustered.configs);
    CHECK(plain.objective >= clustered.objective - 1e-9);
  }
}

TEST_CASE("budgeted clustering search respects the cluster budget") {
  Scenario s = small_scenario(2, 1, {6}, FeasibilityKind::kDiscretePhase, 2, 3);
  s.ris[0].cluster_budget = 2;
  ChannelSet ch = synthesize_channels(s, 0);
  SolverParams params;
  params.restarts = 1;
  params.max_outer_iters = 10;
  PrecodeSolution sol = solve_wsr_clustered(ch, s, params);
  // expanded config takes at most 2 distinct values
  std::vector<std::complex<double>> dist;
  for (Eigen::Index q = 0; q < sol.configs[0].theta.size(); ++q) {
    bool found = false;
    for (auto v : dist) {
      if (std::abs(v - sol.configs[0].theta(q)) < 1e-12) found = true;
    }
    if (!found) dist.push_back(sol.configs[0].theta(q));
  }
  CHECK(dist.size() <= 2);
}
