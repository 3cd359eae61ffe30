#ifndef RISSIM_SCENE_HPP
#define RISSIM_SCENE_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <numbers>
#include <optional>
#include <vector>

#include "rissim/errors.hpp"
#include "rissim/reflect.hpp"

namespace rissim {

enum class FadingModel { kRayleigh, kRician };

struct ChannelGenParams {
  FadingModel model = FadingModel::kRician;
  double rician_k = 3.0;           // linear ratio; 0 reduces to Rayleigh
  double pathloss_exponent = 2.2;
  double reference_loss_db = 30.0;  // at 1 m
  double carrier_wavelength = 0.1;  // meters

  void validate() const;
};

struct RisPanel {
  int elements = 1;  // Q
  FeasibilitySet feasibility;
  Eigen::Vector3d position{0, 0, 0};
  int cluster_budget = 1;  // R <= Q

  void validate() const;
};

// M-PSK with CI half-angle phi (pi/M unless overridden)
struct Constellation {
  int order = 4;
  double ci_half_angle = std::numbers::pi / 4;

  static Constellation psk(int order) {
    return {order, std::numbers::pi / order};
  }
};

struct Terminal {
  double noise_power = 1e-3;  // watts
  Eigen::Vector3d position{0, 0, 1.5};
  double sinr_target = 10.0;  // linear
  Constellation constellation = Constellation::psk(4);
};

struct Eavesdropper {
  int antennas = 1;
  double noise_power = 1e-3;
  Eigen::Vector3d position{0, 0, 1.5};
};

struct Scenario {
  int bs_antennas = 4;   // L
  int num_terminals = 2; // K
  std::vector<RisPanel> ris;
  std::vector<Terminal> terminals;
  std::optional<Eavesdropper> eavesdropper;
  double power_budget = 1.0;
  std::vector<double> weights;
  uint64_t seed = 0;
  ChannelGenParams channel_params;
  Eigen::Vector3d bs_position{0, 0, 10};
  // hybrid-relay antennas, co-located with the first RIS; 0 disables the
  // active channel blocks
  int active_antennas = 0;

  void validate() const;  // throws InvalidScenario
};

// One realized snapshot of every link in the network. Carries its generating
// scenario and the mutable geometry (RIS positions, Markov state) so that
// mobility profiles can resynthesize consistently.
struct ChannelSet {
  cmat direct;                  // K x L
  std::vector<cmat> bs_ris;     // per RIS, Q x L
  std::vector<cmat> ris_user;   // per RIS, K x Q
  std::optional<cmat> bs_act;   // A x L
  std::vector<cvec> act_user;   // per user, length A
  std::optional<cmat> eve_direct;  // N_Eve x L
  std::vector<cmat> eve_ris;       // per RIS, N_Eve x Q

  Scenario scenario;
  std::vector<Eigen::Vector3d> ris_positions;
  int markov_state = 0;
  int snapshot_index = 0;
};

enum class MobilityKind { kStatic, kStochastic, kSteerable, kPredictable, kHybrid };

struct MobilityProfile {
  MobilityKind kind = MobilityKind::kStatic;
  double drift_sigma = 0.0;                  // stochastic / hybrid
  std::vector<Eigen::Vector3d> trajectory;   // steerable waypoints
  std::vector<ChannelGenParams> states;      // predictable / hybrid
  Eigen::MatrixXd transition;                // S x S row-stochastic

  void validate() const;
};

ChannelSet synthesize_channels(const Scenario& scenario, int snapshot_index);

// Eq-style composite downlink matrix: direct + sum_n ris_user * diag(theta) * bs_ris
cmat composite_channel(const ChannelSet& ch, const std::vector<ReflectionConfig>& configs);

// Same composition seen from the eavesdropper's antennas.
cmat composite_eve_channel(const ChannelSet& ch, const std::vector<ReflectionConfig>& configs);

ChannelSet evolve(const ChannelSet& ch, const MobilityProfile& profile, int step);

}  // namespace rissim

#endif  // RISSIM_SCENE_HPP
