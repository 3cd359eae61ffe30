#ifndef RISSIM_PILOT_HPP
#define RISSIM_PILOT_HPP

#include <vector>

#include "rissim/scene.hpp"

namespace rissim {

// Mutually orthonormal pilot sequences, stored as the columns of an L x count
// matrix. count < K forces pilot reuse across terminals.
struct PilotPool {
  cmat pilots;  // L x count

  int count() const { return static_cast<int>(pilots.cols()); }
  void validate() const;  // unit norms, pairwise orthogonality
};

// Haar-random orthonormal pool (QR of a complex Gaussian matrix).
PilotPool make_pool(int l, int count, uint64_t seed);

// user -> pilot index, 1-based; score is the achieved minimum ratio
struct PilotAssignment {
  std::vector<int> map;
  double score = 0;
};

enum class AssignMode { kExhaustive, kGreedy };

// Serving panel per user, chosen by shortest BS-RIS-user path (strongest
// large-scale gain).
std::vector<int> default_serving_map(const Scenario& scenario);

// Signal-to-interference ratio of user k's pilot: the serving cascade's
// response over the sum of every other panel's response to the same pilot.
// The direct BS-user link is treated as blocked during pilot training.
// Returns +infinity when all interfering terms vanish but the signal does not.
double pilot_sir(const ChannelSet& ch, const std::vector<ReflectionConfig>& configs,
                 const PilotPool& pool, const std::vector<int>& map, int k,
                 int n_serving);

// Max-min pilot assignment. Exhaustive enumerates all count^K maps (exact,
// ties broken toward the lexicographically smallest map); greedy assigns users
// in descending serving-gain order and then runs one swap-improvement sweep.
PilotAssignment assign_pilots(const ChannelSet& ch,
                              const std::vector<ReflectionConfig>& configs,
                              const PilotPool& pool,
                              const std::vector<int>& serving_map, AssignMode mode);

}  // namespace rissim

#endif  // RISSIM_PILOT_HPP
