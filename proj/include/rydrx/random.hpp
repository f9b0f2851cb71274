#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "rydrx/constants.hpp"

namespace rydrx {

// Deterministic unit-normal sampler: Box-Muller over the standardized
// mt19937_64 stream, so a seed reproduces the same values on every platform
// (std::normal_distribution is implementation-defined and is avoided).
class NormalSampler {
 public:
  explicit NormalSampler(std::uint64_t seed) : rng_(seed) {}

  double operator()() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    // u1 in (0, 1], u2 in [0, 1); 53-bit mantissas.
    double u1 = static_cast<double>((rng_() >> 11) + 1) * 0x1.0p-53;
    double u2 = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = constants::two_pi * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  std::mt19937_64 rng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace rydrx
