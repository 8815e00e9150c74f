#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace crmot {

// Deterministic Gaussian source. std::normal_distribution is not guaranteed to
// produce the same stream on every standard library, so Box-Muller is done by
// hand on top of mt19937_64, whose output is pinned by the standard.
class GaussianRng {
 public:
  explicit GaussianRng(std::uint64_t seed) : gen_(seed) {}

  double uniform() {
    // 53-bit mantissa-uniform in [0,1)
    return (gen_() >> 11) * 0x1.0p-53;
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace crmot
