#ifndef RISSIM_REFLECT_HPP
#define RISSIM_REFLECT_HPP

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "rissim/errors.hpp"

namespace rissim {

using cvec = Eigen::VectorXcd;
using cmat = Eigen::MatrixXcd;

enum class FeasibilityKind { kGeneral, kContinuousPhase, kDiscretePhase };

struct FeasibilitySet {
  FeasibilityKind kind = FeasibilityKind::kContinuousPhase;
  int tau = 2;  // phase levels, discrete only

  void validate() const {
    if (kind == FeasibilityKind::kDiscretePhase && tau < 2) {
      throw InvalidScenario("discrete feasibility requires tau >= 2");
    }
  }
};

// Per-RIS reflection coefficient vector theta, each entry eta*exp(j*phi).
struct ReflectionConfig {
  cvec theta;
  FeasibilitySet feasibility;

  bool is_feasible(double tol = 1e-9) const;
};

// Partition of element indices into R clusters sharing one coefficient.
struct Clustering {
  std::vector<int> assignment;  // element -> cluster, 0-based
  int num_clusters = 1;

  void validate() const;
  static Clustering contiguous(int elements, int clusters);
};

// Element-wise projection onto the feasibility set.
cvec project(const cvec& theta_raw, const FeasibilitySet& fs);

// theta_q = clustered_theta[assignment[q]]
cvec expand(const cvec& clustered_theta, const Clustering& clustering);

// Bits needed to signal one full configuration update to the RIS.
// quant_bits_per_coeff is used when the set is not discrete.
long control_payload_bits(const ReflectionConfig& config,
                          const std::optional<Clustering>& clustering,
                          int quant_bits_per_coeff = 8);

}  // namespace rissim

#endif  // RISSIM_REFLECT_HPP
