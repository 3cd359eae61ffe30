#ifndef RISSIM_DIST_HPP
#define RISSIM_DIST_HPP

#include <optional>
#include <vector>

#include "rissim/scene.hpp"
#include "rissim/slp.hpp"

namespace rissim {

// Per-panel state for distributed operation: the stale precoder estimate used
// for soft symbol recovery, and this panel's share of each user's SINR target.
struct DistState {
  cmat p_local;                     // L x K, previous-slot precoder estimate
  double beta = 1.0;                // in (0, 1]
  std::vector<double> gamma_split;  // per-user local target of this panel
  std::vector<int> neighbor_ids;
  int refresh_period = 1;
};

enum class RefreshMode { kKeepLocal, kNeighborAverage, kBsBroadcast };

struct RefreshPolicy {
  RefreshMode mode = RefreshMode::kBsBroadcast;
  int period = 1;

  void validate() const {
    if (period < 1) throw InvalidScenario("refresh period must be >= 1");
  }
};

// Equal split of each user's target across panels: every panel gets
// (beta sqrt(gamma_k) / N)^2, so the square-root shares sum to beta sqrt(gamma_k).
std::vector<DistState> make_dist_states(const Scenario& scenario, double beta,
                                        int refresh_period);

// Throws if the square-root shares of any user fail to sum to beta sqrt(gamma_k).
void check_split(const std::vector<DistState>& states, const Scenario& scenario,
                 double beta);

// Pseudo-inverse soft symbol estimate from the impinging signal and the stale
// effective matrix H_BR * P_prev.
cvec soft_estimate(const cvec& y_ris, const cmat& h_br, const cmat& p_prev);

struct LocalSolution {
  SlpSolution slp;   // x, slack, configs (single panel), power
  cmat p_local;      // minimum-Frobenius completion with p_local * s_hat = x
};

// Local symbol-level solve of panel n against its own cascade only, using the
// panel's split targets; the direct BS-user link is not visible locally.
LocalSolution local_slp(const DistState& state, const ChannelSet& ch, int panel,
                        const cvec& s_hat, const SolverParams& params);

// Precoder-refresh protocol across panels.
void refresh(std::vector<DistState>& states, const RefreshPolicy& policy,
             const std::optional<cmat>& p_bs, int t);

struct SlotMetrics {
  int slot = 0;
  double sum_rate = 0;
  double min_true_slack = 0;
  double est_error = 0;           // worst panel's soft-estimate error
  std::vector<double> ris_power;  // local objective value per panel
};

// Full protocol loop: evolve channels, BS transmits, panels estimate and
// self-configure, refresh at the slot boundary. oracle_estimates bypasses the
// estimation step (panels see the true symbols and precoder), which serves as
// the centralized reference.
std::vector<SlotMetrics> run_distributed_episode(const Scenario& scenario,
                                                 const MobilityProfile& profile,
                                                 int t_slots, const RefreshPolicy& policy,
                                                 const SolverParams& params,
                                                 double beta = 1.0,
                                                 double sensing_noise = 0.0,
                                                 bool oracle_estimates = false);

}  // namespace rissim

#endif  // RISSIM_DIST_HPP
