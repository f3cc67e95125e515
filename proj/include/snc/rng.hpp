#pragma once

#include <cstdint>

#include "snc/special.hpp"

namespace snc {

// Small deterministic generator (splitmix64 core). Draws are identical
// across platforms, unlike std::normal_distribution; normal variates go
// through the inverse CDF so a stream is reproducible bit-for-bit.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform on the open interval (0,1).
  double uniform() {
    // 53 random bits, shifted into (0,1) by a half-ulp offset
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() { return norm_quantile(uniform()); }

  /// Half-normal |N(0,1)| draw.
  double half_normal() { return norm_quantile(0.5 + 0.5 * uniform()); }

  /// N(mu, sd^2) truncated to [0, inf), by tail-stable inverse CDF.
  double truncated_normal_pos(double mu, double sd) {
    const double alpha = -mu / sd;
    const double p_low = norm_cdf(alpha);
    const double u = uniform();
    double g;
    if (p_low < 0.5) {
      g = norm_quantile(p_low + u * (1.0 - p_low));
    } else {
      g = -norm_quantile((1.0 - p_low) * (1.0 - u));
    }
    return mu + sd * g;
  }

  /// Derived independent stream: hash of this stream's seed and a tag.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t tag) {
    Rng r(seed ^ (0x632be59bd9b4e019ULL + tag * 0x9e3779b97f4a7c15ULL));
    return r.next_u64();
  }

 private:
  std::uint64_t state_;
};

}  // namespace snc
