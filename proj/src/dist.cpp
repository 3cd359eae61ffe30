#include "rissim/dist.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "rissim/precode.hpp"
#include "rissim/rng.hpp"

namespace rissim {

std::vector<DistState> make_dist_states(const Scenario& scenario, double beta,
                                        int refresh_period) {
  if (beta <= 0 || beta > 1) throw InvalidScenario("beta must lie in (0, 1]");
  if (refresh_period < 1) throw InvalidScenario("refresh period must be >= 1");
  if (scenario.ris.empty()) {
    throw InvalidScenario("distributed operation needs at least one panel");
  }
  const double n = static_cast<double>(scenario.ris.size());
  std::vector<DistState> states;
  for (size_t i = 0; i < scenario.ris.size(); ++i) {
    DistState st;
    st.p_local = cmat::Zero(scenario.bs_antennas, scenario.num_terminals);
    st.beta = beta;
    st.refresh_period = refresh_period;
    for (const auto& t : scenario.terminals) {
      const double share = beta * std::sqrt(t.sinr_target) / n;
      st.gamma_split.push_back(share * share);
    }
    for (size_t j = 0; j < scenario.ris.size(); ++j) {
      if (j != i) st.neighbor_ids.push_back(static_cast<int>(j));
    }
    states.push_back(std::move(st));
  }
  return states;
}

void check_split(const std::vector<DistState>& states, const Scenario& scenario,
                 double beta) {
  for (int k = 0; k < scenario.num_terminals; ++k) {
    double sum = 0;
    for (const auto& st : states) sum += std::sqrt(st.gamma_split[static_cast<size_t>(k)]);
    const double want = beta * std::sqrt(scenario.terminals[static_cast<size_t>(k)].sinr_target);
    if (std::abs(sum - want) > 1e-9) {
      throw ValidationError("per-panel SINR shares do not sum to the split target");
    }
  }
}

cvec soft_estimate(const cvec& y_ris, const cmat& h_br, const cmat& p_prev) {
  if (y_ris.size() != h_br.rows() || h_br.cols() != p_prev.rows()) {
    throw DimensionMismatch("observation, cascade and precoder dimensions disagree");
  }
  if (h_br.rows() < p_prev.cols()) {
    throw DimensionMismatch("local system is underdetermined (Q < K)");
  }
  const cmat eff = h_br * p_prev;
  Eigen::CompleteOrthogonalDecomposition<cmat> cod(eff);
  if (cod.rank() < eff.cols()) {
    throw RankDeficient("stale effective matrix has deficient column rank");
  }
  return cod.solve(y_ris);
}

LocalSolution local_slp(const DistState& state, const ChannelSet& ch, int panel,
                        const cvec& s_hat, const SolverParams& params) {
  if (panel < 0 || panel >= static_cast<int>(ch.bs_ris.size())) {
    throw IndexOutOfRange("panel index out of range");
  }
  const size_t n = static_cast<size_t>(panel);
  const Scenario& full = ch.scenario;
  if (s_hat.size() != full.num_terminals) {
    throw DimensionMismatch("one soft symbol per terminal expected");
  }

  // view of the network reduced to this panel's cascade: no direct link, and
  // the panel's split of each user's target
  Scenario sub = full;
  sub.ris = {full.ris[n]};
  for (int k = 0; k < sub.num_terminals; ++k) {
    sub.terminals[static_cast<size_t>(k)].sinr_target =
        state.gamma_split[static_cast<size_t>(k)];
  }
  ChannelSet subch;
  subch.scenario = sub;
  subch.direct = cmat::Zero(full.num_terminals, full.bs_antennas);
  subch.bs_ris = {ch.bs_ris[n]};
  subch.ris_user = {ch.ris_user[n]};

  // hard-decide the soft estimates onto each terminal's constellation: the CI
  // geometry is defined for constellation points, and the decision makes the
  // local solve identical to a centralized one whenever the estimate is sound
  cvec sym(s_hat.size());
  for (Eigen::Index k = 0; k < s_hat.size(); ++k) {
    const int order = full.terminals[static_cast<size_t>(k)].constellation.order;
    const double sector = 2.0 * std::numbers::pi / order;
    long m = std::lround(std::arg(s_hat(k)) / sector);
    m = ((m % order) + order) % order;
    sym(k) = std::polar(1.0, sector * static_cast<double>(m));
  }

  LocalSolution out;
  out.slp = solve_slp(subch, sub, sym, nullptr, params);
  // rank-preserving completion: smallest update of the stale precoder that
  // reproduces the computed transmit vector on the estimated symbols
  out.p_local = state.p_local +
                (out.slp.x - state.p_local * sym) * sym.adjoint() /
                    static_cast<double>(sym.size());
  return out;
}

void refresh(std::vector<DistState>& states, const RefreshPolicy& policy,
             const std::optional<cmat>& p_bs, int t) {
  policy.validate();
  switch (policy.mode) {
    case RefreshMode::kKeepLocal:
      return;
    case RefreshMode::kNeighborAverage: {
      std::vector<cmat> next;
      for (const auto& st : states) {
        cmat mean = st.p_local;
        for (int id : st.neighbor_ids) mean += states[static_cast<size_t>(id)].p_local;
        next.push_back(mean / static_cast<double>(st.neighbor_ids.size() + 1));
      }
      for (size_t i = 0; i < states.size(); ++i) states[i].p_local = next[i];
      return;
    }
    case RefreshMode::kBsBroadcast:
      if (t % policy.period != 0) return;
      if (!p_bs) throw MissingBroadcast("broadcast slot without a BS precoder");
      for (auto& st : states) st.p_local = *p_bs;
      return;
  }
}

std::vector<SlotMetrics> run_distributed_episode(const Scenario& scenario,
                                                 const MobilityProfile& profile,
                                                 int t_slots, const RefreshPolicy& policy,
                                                 const SolverParams& params,
                                                 double beta, double sensing_noise,
                                                 bool oracle_estimates) {
  scenario.validate();
  profile.validate();
  policy.validate();
  params.validate();
  if (t_slots < 0) throw InvalidScenario("slot count must be >= 0");
  if (sensing_noise < 0) throw InvalidScenario("sensing noise must be >= 0");

  ChannelSet ch = synthesize_channels(scenario, 0);
  std::vector<DistState> states = make_dist_states(scenario, beta, policy.period);
  std::vector<ReflectionConfig> configs;
  for (const auto& r : scenario.ris) {
    configs.push_back(
        ReflectionConfig{project(cvec::Ones(r.elements), r.feasibility), r.feasibility});
  }

  Prng rng(mix_seed(scenario.seed, 0xd157, 0, 0));
  std::vector<SlotMetrics> series;
  for (int t = 0; t < t_slots; ++t) {
    if (t > 0) ch = evolve(ch, profile, t);

    cmat p_bs;
    try {
      p_bs = mrt_precoder(ch, configs, scenario.power_budget);
    } catch (const ZeroChannel&) {
      p_bs = cmat::Constant(scenario.bs_antennas, scenario.num_terminals,
                            std::sqrt(scenario.power_budget /
                                      (scenario.bs_antennas * scenario.num_terminals)));
    }
    if (t == 0) {
      // bootstrap: panels start from the first actual precoder
      for (auto& st : states) st.p_local = p_bs;
    }
    // the refresh payload travels with the downlink frame, so panels apply it
    // before estimating the current slot
    refresh(states, policy, p_bs, t);

    cvec s(scenario.num_terminals);
    for (int k = 0; k < scenario.num_terminals; ++k) {
      const int m = scenario.terminals[static_cast<size_t>(k)].constellation.order;
      s(k) = std::polar(1.0, 2.0 * std::numbers::pi * rng.below(m) / m);
    }
    const cvec x = p_bs * s;

    SlotMetrics row;
    row.slot = t;
    double worst_err = 0;
    for (size_t n = 0; n < states.size(); ++n) {
      cvec s_hat;
      if (oracle_estimates) {
        s_hat = s;
      } else {
        cvec y = ch.bs_ris[n] * x;
        if (sensing_noise > 0) {
          const double amp = std::sqrt(sensing_noise);
          for (Eigen::Index q = 0; q < y.size(); ++q) y(q) += amp * rng.cgaussian();
        }
        s_hat = soft_estimate(y, ch.bs_ris[n], states[n].p_local);
      }
      worst_err = std::max(worst_err, (s_hat - s).norm());
      LocalSolution loc = local_slp(states[n], ch, static_cast<int>(n), s_hat, params);
      configs[n] = loc.slp.configs[0];
      states[n].p_local = loc.p_local;
      row.ris_power.push_back(loc.slp.power);
    }
    row.est_error = worst_err;

    double rate = 0;
    const cmat h = composite_channel(ch, configs);
    for (int k = 0; k < scenario.num_terminals; ++k) {
      rate += std::log2(1.0 + sinr(ch, configs, p_bs, k));
    }
    row.sum_rate = rate;
    double slack = std::numeric_limits<double>::infinity();
    for (int k = 0; k < scenario.num_terminals; ++k) {
      const auto& term = scenario.terminals[static_cast<size_t>(k)];
      slack = std::min(slack, ci_slack((h.row(k) * x)(0), s(k),
                                       std::sqrt(term.noise_power), term.sinr_target,
                                       term.constellation.ci_half_angle));
    }
    row.min_true_slack = slack;

    check_split(states, scenario, beta);
    series.push_back(std::move(row));
  }
  return series;
}

}  // namespace rissim
