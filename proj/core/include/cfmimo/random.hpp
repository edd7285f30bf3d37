// Deterministic random streams for Monte Carlo trials.
//
// Distributions are generated explicitly from the mt19937_64 word stream
// (std:: distribution objects are implementation-defined), so a given seed
// reproduces the same draw sequence on every build of this code base.
#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace cfmimo {

// splitmix64; used to whiten seeds and derive independent substreams.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // Substream rng for worker `stream` (e.g. a trial index).
  static Rng substream(std::uint64_t master_seed, std::uint64_t stream) {
    return Rng(mix_seed(master_seed, stream));
  }

  std::uint64_t next_u64() { return gen_(); }

  // Uniform on [0,1) with 53-bit resolution.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n).
  int uniform_int(int n);

  // Standard normal via Box-Muller; second variate is cached.
  double normal();

  // Circularly symmetric complex normal CN(0, 1).
  std::complex<double> cnormal() {
    const double s = 0.7071067811865476;  // 1/sqrt(2)
    return {normal() * s, normal() * s};
  }

 private:
  std::mt19937_64 gen_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace cfmimo
