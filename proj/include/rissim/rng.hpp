#ifndef RISSIM_RNG_HPP
#define RISSIM_RNG_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace rissim {

// Counter-style seeding: mixes (seed, snapshot, stream tag) into one 64-bit
// state so every matrix draw is an independent, reproducible stream.
inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t mix_seed(uint64_t seed, uint64_t a, uint64_t b, uint64_t c) {
  uint64_t s = splitmix64(seed);
  s = splitmix64(s ^ splitmix64(a));
  s = splitmix64(s ^ splitmix64(b));
  return splitmix64(s ^ splitmix64(c));
}

// Deterministic Gaussian sampler. std::normal_distribution is
// implementation-defined, so Box-Muller on raw mt19937_64 output keeps the
// bit stream identical across standard libraries.
class Prng {
 public:
  explicit Prng(uint64_t seed) : engine_(seed) {}

  double uniform() {
    // (0, 1], never 0 so log() below is safe
    return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
  }

  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  // CN(0,1): unit total variance split across real/imag
  std::complex<double> cgaussian() {
    const double s = M_SQRT1_2;
    const double re = gaussian();
    const double im = gaussian();
    return {s * re, s * im};
  }

  uint64_t next_u64() { return engine_(); }

  // integer in [0, n)
  uint64_t below(uint64_t n) { return engine_() % n; }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace rissim

#endif  // RISSIM_RNG_HPP
