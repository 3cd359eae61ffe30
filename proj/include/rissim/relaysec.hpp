#ifndef RISSIM_RELAYSEC_HPP
#define RISSIM_RELAYSEC_HPP

#include <vector>

#include "rissim/precode.hpp"
#include "rissim/scene.hpp"

namespace rissim {

// Amplify-and-forward path attached to the first panel's position.
struct HybridRelayConfig {
  double alpha = 0;               // amplification factor
  double relay_power_budget = 0;  // cap on the amplified transmit power
  double relay_noise = 1e-3;      // noise power injected at the relay
  int active_antennas = 1;

  void validate() const {
    if (alpha < 0) throw InvalidScenario("alpha must be >= 0");
    if (relay_noise <= 0) throw InvalidScenario("relay noise power must be > 0");
    if (relay_power_budget < 0) throw InvalidScenario("relay power budget must be >= 0");
    if (active_antennas < 1) throw InvalidScenario("active_antennas must be >= 1");
  }
};

struct SecrecyResult {
  double c1 = 0;
  double c2 = 0;
  double c_eve = 0;
  double secrecy_rate = 0;  // max(0, c1 - c_eve)
};

// SINR of the amplified relay path alone: the reflective panels play no part.
double sinr_active(const ChannelSet& ch, const HybridRelayConfig& cfg, const cmat& precoder,
                   int user);

// Maximum-ratio combining of the reflective and amplified paths: the per-path
// SINRs add.
double sinr_mrc(const ChannelSet& ch, const std::vector<ReflectionConfig>& configs,
                const HybridRelayConfig& cfg, const cmat& precoder, int user);

// Weighted sum rate over the combined SINR, jointly over precoder, reflection
// and amplification factor. alpha is searched on its feasible interval by
// golden section; the returned solution carries it in .alpha.
PrecodeSolution solve_hybrid(const ChannelSet& ch, const Scenario& scenario,
                             const HybridRelayConfig& cfg, const SolverParams& params);

// Capacity of the eavesdropper watching user 1's stream while user 2's stream
// acts as interference: log2 det(I + (sigma^2 I + K)^-1 D) with rank-one
// signal covariance D and interference covariance K.
double eve_capacity(const ChannelSet& ch, const std::vector<ReflectionConfig>& configs,
                    const cvec& p1, const cvec& p2, const Eavesdropper& eve);

SecrecyResult secrecy_eval(const ChannelSet& ch, const std::vector<ReflectionConfig>& configs,
                           const cvec& p1, const cvec& p2, const Scenario& scenario);

// Maximize user 1's secrecy rate subject to user 2's rate demand and the
// total power budget. Requires exactly two terminals.
PrecodeSolution solve_secrecy(const ChannelSet& ch, const Scenario& scenario,
                              double c_demand, const SolverParams& params);

}  // namespace rissim

#endif  // RISSIM_RELAYSEC_HPP
