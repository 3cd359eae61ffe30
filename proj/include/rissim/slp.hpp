#ifndef RISSIM_SLP_HPP
#define RISSIM_SLP_HPP

#include <complex>
#include <vector>

#include "rissim/precode.hpp"
#include "rissim/scene.hpp"

namespace rissim {

// Constructive-interference target of one user: noise amplitude sigma
// (sqrt of noise power), SINR target gamma, PSK half-angle phi.
struct CiSpec {
  double sigma = 1.0;
  double gamma = 1.0;
  double phi = std::numbers::pi / 4;
};

struct SlpSolution {
  cvec x;                  // per-slot transmit vector
  cmat all_x;              // all-symbol variant: L x (prod of orders)
  Eigen::VectorXd slack;   // per-user CI slack of x
  double power = 0;        // ||x||^2, or ||all_x||_F^2 for the joint variant
  std::vector<ReflectionConfig> configs;
  double kkt_residual = 0;
  std::vector<double> iterate_trace;  // power per outer iteration (free theta)
};

// Left-hand side of the CI constraint; >= 0 means the noise-free point sits
// inside the constructive region.
double ci_slack(std::complex<double> y_tilde, std::complex<double> symbol,
                double sigma_w, double gamma, double phi);

// Minimum-power transmit vector for fixed effective channel rows (K x L).
// Solved as a strictly convex QP via dual coordinate ascent.
SlpSolution slp_min_power(const cmat& rows, const cvec& symbols,
                          const std::vector<CiSpec>& ci);

SlpSolution solve_slp(const ChannelSet& ch, const Scenario& scenario, const cvec& symbols,
                      const std::vector<ReflectionConfig>* fixed_configs,
                      const SolverParams& params);

SlpSolution solve_slp_all_symbols(const ChannelSet& ch, const Scenario& scenario,
                                  const SolverParams& params,
                                  const std::vector<ReflectionConfig>* init_configs = nullptr,
                                  long cap = 4096);

}  // namespace rissim

#endif  // RISSIM_SLP_HPP
