#include "rissim/scene.hpp"

#include <cmath>

#include "rissim/rng.hpp"

namespace rissim {

namespace {

// Stream tags keep every link's random draw independent.
enum LinkTag : uint64_t {
  kTagDirect = 1,
  kTagBsRis = 2,
  kTagRisUser = 3,
  kTagEveDirect = 4,
  kTagEveRis = 5,
  kTagActBs = 6,
  kTagActUser = 7,
  kTagEvolve = 1000,
  kTagMarkov = 2000,
};

double path_amplitude(const ChannelGenParams& p, double distance) {
  const double d = std::max(distance, 1.0);
  const double loss_db = p.reference_loss_db + 10.0 * p.pathloss_exponent * std::log10(d);
  return std::pow(10.0, -loss_db / 20.0);
}

struct LinkStats {
  cmat mean;          // deterministic LoS component
  double scatter;     // std of the diffuse part, per entry
};

// rows: receive-side element count, cols: transmit-side element count
LinkStats link_stats(const ChannelGenParams& p, const Eigen::Vector3d& tx,
                     const Eigen::Vector3d& rx, int rows, int cols) {
  const Eigen::Vector3d delta = rx - tx;
  const double d = delta.norm();
  const double amp = path_amplitude(p, d);
  const double k = (p.model == FadingModel::kRayleigh) ? 0.0 : p.rician_k;
  const double los_amp = amp * std::sqrt(k / (k + 1.0));
  const double scatter = amp * std::sqrt(1.0 / (k + 1.0));

  const Eigen::Vector3d u = (d > 0) ? Eigen::Vector3d(delta / d) : Eigen::Vector3d::UnitZ();
  const double base = -2.0 * std::numbers::pi * d / p.carrier_wavelength;

  LinkStats st;
  st.mean.resize(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      // half-wavelength linear-array phase ramp on both ends
      const double phase = base + std::numbers::pi * (r * u(0) + c * u(1));
      st.mean(r, c) = los_amp * std::polar(1.0, phase);
    }
  }
  st.scatter = scatter;
  return st;
}

cmat draw_link(const ChannelGenParams& p, const Eigen::Vector3d& tx,
               const Eigen::Vector3d& rx, int rows, int cols, Prng& rng) {
  LinkStats st = link_stats(p, tx, rx, rows, cols);
  cmat out(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      out(r, c) = st.mean(r, c) + st.scatter * rng.cgaussian();
    }
  }
  return out;
}

Prng stream(const Scenario& s, int snapshot, uint64_t tag, uint64_t sub) {
  return Prng(mix_seed(s.seed, static_cast<uint64_t>(snapshot), tag, sub));
}

}  // namespace

void ChannelGenParams::validate() const {
  if (rician_k < 0) throw InvalidScenario("rician_k must be >= 0");
  if (pathloss_exponent <= 0) throw InvalidScenario("pathloss_exponent must be > 0");
  if (carrier_wavelength <= 0) throw InvalidScenario("carrier_wavelength must be > 0");
}

void RisPanel::validate() const {
  if (elements < 1) throw InvalidScenario("RIS needs at least one element");
  if (cluster_budget < 1 || cluster_budget > elements) {
    throw InvalidScenario("cluster budget must satisfy 1 <= R <= Q");
  }
  feasibility.validate();
}

void Scenario::validate() const {
  if (bs_antennas < 1) throw InvalidScenario("bs_antennas must be positive");
  if (num_terminals < 1) throw InvalidScenario("need at least one terminal");
  if (num_terminals > bs_antennas) {
    throw InvalidScenario("K <= L required, got K=" + std::to_string(num_terminals) +
                          " L=" + std::to_string(bs_antennas));
  }
  if (static_cast<int>(weights.size()) != num_terminals) {
    throw InvalidScenario("weights length must equal K");
  }
  for (double w : weights) {
    if (!(w >= 0) || !std::isfinite(w)) throw InvalidScenario("weights must be >= 0 and finite");
  }
  if (power_budget < 0) throw InvalidScenario("power budget must be >= 0");
  if (static_cast<int>(terminals.size()) != num_terminals) {
    throw InvalidScenario("terminal list length must equal K");
  }
  for (const auto& t : terminals) {
    if (t.noise_power <= 0) throw InvalidScenario("terminal noise power must be > 0");
    if (t.sinr_target <= 0) throw InvalidScenario("sinr target must be > 0");
  }
  for (const auto& r : ris) r.validate();
  if (eavesdropper) {
    if (eavesdropper->antennas < 1) throw InvalidScenario("eavesdropper needs >= 1 antenna");
    if (eavesdropper->noise_power <= 0) throw InvalidScenario("eavesdropper noise must be > 0");
  }
  if (active_antennas < 0) throw InvalidScenario("active_antennas must be >= 0");
  if (active_antennas > 0 && ris.empty()) {
    throw InvalidScenario("active antennas require at least one RIS");
  }
  channel_params.validate();
}

void MobilityProfile::validate() const {
  if (drift_sigma < 0 || drift_sigma > 1) {
    throw InvalidScenario("drift_sigma must lie in [0, 1]");
  }
  if (kind == MobilityKind::kPredictable || kind == MobilityKind::kHybrid) {
    const auto s = static_cast<Eigen::Index>(states.size());
    if (s == 0) throw InvalidScenario("predictable mobility needs states");
    if (transition.rows() != s || transition.cols() != s) {
      throw InvalidScenario("transition matrix must be S x S");
    }
    for (Eigen::Index i = 0; i < s; ++i) {
      if (std::abs(transition.row(i).sum() - 1.0) > 1e-12) {
        throw InvalidScenario("transition rows must sum to 1");
      }
      for (Eigen::Index j = 0; j < s; ++j) {
        if (transition(i, j) < 0) throw InvalidScenario("transition entries must be >= 0");
      }
    }
  }
  if (kind == MobilityKind::kSteerable && trajectory.empty()) {
    throw InvalidScenario("steerable mobility needs a trajectory");
  }
}

namespace {

ChannelSet synthesize_at(const Scenario& scenario, int snapshot_index,
                         const std::vector<Eigen::Vector3d>& ris_positions,
                         const ChannelGenParams& params) {
  const int num_l = scenario.bs_antennas;
  const int num_k = scenario.num_terminals;
  ChannelSet ch;
  ch.scenario = scenario;
  ch.snapshot_index = snapshot_index;
  ch.ris_positions = ris_positions;

  ch.direct.resize(num_k, num_l);
  for (int k = 0; k < num_k; ++k) {
    Prng rng = stream(scenario, snapshot_index, kTagDirect, static_cast<uint64_t>(k));
    ch.direct.row(k) = draw_link(params, scenario.bs_position,
                                 scenario.terminals[k].position, 1, num_l, rng);
  }

  for (size_t n = 0; n < scenario.ris.size(); ++n) {
    const int q = scenario.ris[n].elements;
    {
      Prng rng = stream(scenario, snapshot_index, kTagBsRis, n);
      ch.bs_ris.push_back(
          draw_link(params, scenario.bs_position, ris_positions[n], q, num_l, rng));
    }
    cmat ru(num_k, q);
    for (int k = 0; k < num_k; ++k) {
      Prng rng = stream(scenario, snapshot_index, kTagRisUser,
                        (n << 16) | static_cast<uint64_t>(k));
      ru.row(k) = draw_link(params, ris_positions[n],
                            scenario.terminals[k].position, 1, q, rng);
    }
    ch.ris_user.push_back(std::move(ru));
  }

  if (scenario.active_antennas > 0) {
    const int a = scenario.active_antennas;
    const Eigen::Vector3d relay_pos = ris_positions[0];
    {
      Prng rng = stream(scenario, snapshot_index, kTagActBs, 0);
      ch.bs_act = draw_link(params, scenario.bs_position, relay_pos, a, num_l, rng);
    }
    for (int k = 0; k < num_k; ++k) {
      Prng rng = stream(scenario, snapshot_index, kTagActUser, static_cast<uint64_t>(k));
      cmat row = draw_link(params, relay_pos, scenario.terminals[k].position, 1, a, rng);
      ch.act_user.push_back(row.row(0).transpose());
    }
  }

  if (scenario.eavesdropper) {
    const int ne = scenario.eavesdropper->antennas;
    {
      Prng rng = stream(scenario, snapshot_index, kTagEveDirect, 0);
      ch.eve_direct = draw_link(params, scenario.bs_position,
                                scenario.eavesdropper->position, ne, num_l, rng);
    }
    for (size_t n = 0; n < scenario.ris.size(); ++n) {
      Prng rng = stream(scenario, snapshot_index, kTagEveRis, n);
      ch.eve_ris.push_back(draw_link(params, ris_positions[n],
                                     scenario.eavesdropper->position, ne,
                                     scenario.ris[n].elements, rng));
    }
  }
  return ch;
}

}  // namespace

ChannelSet synthesize_channels(const Scenario& scenario, int snapshot_index) {
  scenario.validate();
  std::vector<Eigen::Vector3d> pos;
  pos.reserve(scenario.ris.size());
  for (const auto& r : scenario.ris) pos.push_back(r.position);
  return synthesize_at(scenario, snapshot_index, pos, scenario.channel_params);
}

cmat composite_channel(const ChannelSet& ch, const std::vector<ReflectionConfig>& configs) {
  if (configs.size() != ch.bs_ris.size()) {
    throw DimensionMismatch("need exactly one reflection config per RIS");
  }
  cmat h = ch.direct;
  for (size_t n = 0; n < configs.size(); ++n) {
    if (configs[n].theta.size() != ch.bs_ris[n].rows()) {
      throw DimensionMismatch("theta length does not match RIS element count");
    }
    h += ch.ris_user[n] * configs[n].theta.asDiagonal() * ch.bs_ris[n];
  }
  return h;
}

cmat composite_eve_channel(const ChannelSet& ch, const std::vector<ReflectionConfig>& configs) {
  if (!ch.eve_direct) throw MissingEveChannels("scenario has no eavesdropper");
  if (configs.size() != ch.eve_ris.size()) {
    throw DimensionMismatch("need exactly one reflection config per RIS");
  }
  cmat h = *ch.eve_direct;
  for (size_t n = 0; n < configs.size(); ++n) {
    if (configs[n].theta.size() != ch.bs_ris[n].rows()) {
      throw DimensionMismatch("theta length does not match RIS element count");
    }
    h += ch.eve_ris[n] * configs[n].theta.asDiagonal() * ch.bs_ris[n];
  }
  return h;
}

namespace {

// First-order Gauss-Markov around the deterministic LoS mean; variance
// normalized so the per-entry second moment is stationary.
void gauss_markov(cmat& h, const LinkStats& st, double sigma, Prng& rng) {
  const double keep = std::sqrt(1.0 - sigma * sigma);
  for (Eigen::Index r = 0; r < h.rows(); ++r) {
    for (Eigen::Index c = 0; c < h.cols(); ++c) {
      const std::complex<double> diffuse = h(r, c) - st.mean(r, c);
      h(r, c) = st.mean(r, c) + keep * diffuse + sigma * st.scatter * rng.cgaussian();
    }
  }
}

ChannelSet evolve_stochastic(const ChannelSet& ch, double sigma, int step) {
  ChannelSet out = ch;
  out.snapshot_index = step;
  const Scenario& s = ch.scenario;
  const ChannelGenParams& p = s.channel_params;

  for (int k = 0; k < s.num_terminals; ++k) {
    Prng rng = stream(s, step, kTagEvolve + kTagDirect, static_cast<uint64_t>(k));
    LinkStats st = link_stats(p, s.bs_position, s.terminals[k].position, 1, s.bs_antennas);
    cmat row = out.direct.row(k);
    gauss_markov(row, st, sigma, rng);
    out.direct.row(k) = row;
  }
  for (size_t n = 0; n < s.ris.size(); ++n) {
    {
      Prng rng = stream(s, step, kTagEvolve + kTagBsRis, n);
      LinkStats st = link_stats(p, s.bs_position, ch.ris_positions[n],
                                s.ris[n].elements, s.bs_antennas);
      gauss_markov(out.bs_ris[n], st, sigma, rng);
    }
    for (int k = 0; k < s.num_terminals; ++k) {
      Prng rng = stream(s, step, kTagEvolve + kTagRisUser,
                        (n << 16) | static_cast<uint64_t>(k));
      LinkStats st = link_stats(p, ch.ris_positions[n], s.terminals[k].position,
                                1, s.ris[n].elements);
      cmat row = out.ris_user[n].row(k);
      gauss_markov(row, st, sigma, rng);
      out.ris_user[n].row(k) = row;
    }
  }
  // active and eavesdropper blocks follow the same law
  if (out.bs_act) {
    Prng rng = stream(s, step, kTagEvolve + kTagActBs, 0);
    LinkStats st = link_stats(p, s.bs_position, ch.ris_positions[0],
                              s.active_antennas, s.bs_antennas);
    gauss_markov(*out.bs_act, st, sigma, rng);
  }
  for (size_t k = 0; k < out.act_user.size(); ++k) {
    Prng rng = stream(s, step, kTagEvolve + kTagActUser, k);
    LinkStats st = link_stats(p, ch.ris_positions[0], s.terminals[k].position,
                              1, s.active_antennas);
    cmat row = out.act_user[k].transpose();
    gauss_markov(row, st, sigma, rng);
    out.act_user[k] = row.row(0).transpose();
  }
  if (out.eve_direct) {
    Prng rng = stream(s, step, kTagEvolve + kTagEveDirect, 0);
    LinkStats st = link_stats(p, s.bs_position, s.eavesdropper->position,
                              s.eavesdropper->antennas, s.bs_antennas);
    gauss_markov(*out.eve_direct, st, sigma, rng);
    for (size_t n = 0; n < out.eve_ris.size(); ++n) {
      Prng rng2 = stream(s, step, kTagEvolve + kTagEveRis, n);
      LinkStats st2 = link_stats(p, ch.ris_positions[n], s.eavesdropper->position,
                                 s.eavesdropper->antennas, s.ris[n].elements);
      gauss_markov(out.eve_ris[n], st2, sigma, rng2);
    }
  }
  return out;
}

}  // namespace

ChannelSet evolve(const ChannelSet& ch, const MobilityProfile& profile, int step) {
  profile.validate();
  switch (profile.kind) {
    case MobilityKind::kStatic:
      return ch;
    case MobilityKind::kStochastic:
      if (profile.drift_sigma == 0.0) return ch;
      return evolve_stochastic(ch, profile.drift_sigma, step);
    case MobilityKind::kSteerable: {
      std::vector<Eigen::Vector3d> pos = ch.ris_positions;
      const Eigen::Vector3d wp =
          profile.trajectory[static_cast<size_t>(step) % profile.trajectory.size()];
      for (auto& p : pos) p = wp + (p - ch.scenario.ris[0].position);
      ChannelSet out = synthesize_at(ch.scenario, step, pos, ch.scenario.channel_params);
      return out;
    }
    case MobilityKind::kPredictable:
    case MobilityKind::kHybrid: {
      Prng rng = stream(ch.scenario, step, kTagMarkov, 0);
      const double u = rng.uniform();
      double acc = 0.0;
      int next = ch.markov_state;
      for (Eigen::Index j = 0; j < profile.transition.cols(); ++j) {
        acc += profile.transition(ch.markov_state, j);
        if (u <= acc) {
          next = static_cast<int>(j);
          break;
        }
      }
      ChannelSet out = synthesize_at(ch.scenario, step, ch.ris_positions,
                                     profile.states[static_cast<size_t>(next)]);
      out.markov_state = next;
      if (profile.kind == MobilityKind::kHybrid && profile.drift_sigma > 0) {
        out = evolve_stochastic(out, profile.drift_sigma, step);
        out.markov_state = next;
      }
      return out;
    }
  }
  throw InvalidScenario("unknown mobility kind");
}

}  // namespace rissim
