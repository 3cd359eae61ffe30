#ifndef RISSIM_PRECODE_HPP
#define RISSIM_PRECODE_HPP

#include <functional>
#include <string>
#include <vector>

#include "rissim/scene.hpp"

namespace rissim {

struct SolverParams {
  int max_outer_iters = 200;
  int max_inner_iters = 50;
  double tol = 1e-6;          // relative objective change
  double step_init = 1.0;
  double backtrack_factor = 0.5;
  int restarts = 4;
  uint64_t seed = 0;
  std::string trace_path;     // when nonempty, per-iteration CSV trace

  void validate() const {
    if (tol <= 0) throw InvalidScenario("tol must be > 0");
    if (restarts < 1) throw InvalidScenario("restarts must be >= 1");
    if (backtrack_factor <= 0 || backtrack_factor >= 1) {
      throw InvalidScenario("backtrack_factor must lie in (0,1)");
    }
  }
};

struct PrecodeSolution {
  cmat precoder;  // L x K, columns p_k
  std::vector<ReflectionConfig> configs;
  double objective = 0;
  std::vector<double> iterate_trace;
  bool converged = false;
  double alpha = 0;  // hybrid relaying only
};

// Eq.-(5)-style SINR of one user under the composite channel.
double sinr(const ChannelSet& ch, const std::vector<ReflectionConfig>& configs,
            const cmat& precoder, int user);

double weighted_sum_rate(const ChannelSet& ch, const std::vector<ReflectionConfig>& configs,
                         const cmat& precoder, const std::vector<double>& weights);

// Baselines: conjugate match per user / right pseudo-inverse, both scaled to
// the power budget.
cmat mrt_precoder(const ChannelSet& ch, const std::vector<ReflectionConfig>& configs,
                  double power_budget);
cmat zf_precoder(const ChannelSet& ch, const std::vector<ReflectionConfig>& configs,
                 double power_budget);

// Joint precoder / passive-beamformer weighted-sum-rate maximization by
// block-coordinate ascent. init_configs, when given, seeds one extra restart.
PrecodeSolution solve_wsr(const ChannelSet& ch, const Scenario& scenario,
                          const SolverParams& params,
                          const std::vector<ReflectionConfig>* init_configs = nullptr);

// Same problem with theta tied through the given per-RIS clusterings.
PrecodeSolution solve_wsr_clustered(const ChannelSet& ch, const Scenario& scenario,
                                    const std::vector<Clustering>& clusterings,
                                    const SolverParams& params);

// Partition chosen by greedy element-move local search from contiguous blocks
// of each panel's cluster budget.
PrecodeSolution solve_wsr_clustered(const ChannelSet& ch, const Scenario& scenario,
                                    const SolverParams& params);

// Shared internals, also used by the hybrid-relay and secrecy solvers.
namespace detail {

// WSR over explicit channel rows (K x L), no RIS structure.
double wsr_given_rows(const cmat& rows, const cmat& precoder,
                      const std::vector<double>& noise,
                      const std::vector<double>& weights);

// Projection onto the total-power ball.
cmat project_power(const cmat& precoder, double power_budget);

// One projected-gradient-ascent pass over P with Armijo backtracking.
// objective must be a callable double(const cmat&). Returns the new precoder;
// never decreases the objective.
cmat ascend_precoder(const cmat& precoder, const cmat& grad, double power_budget,
                     const SolverParams& params,
                     const std::function<double(const cmat&)>& objective);

cmat wsr_grad_precoder(const cmat& rows, const cmat& precoder,
                       const std::vector<double>& noise,
                       const std::vector<double>& weights);

}  // namespace detail

}  // namespace rissim

#endif  // RISSIM_PRECODE_HPP
