#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace greencells {

// Counter-based RNG: every draw is a pure function of (seed, stream key,
// counter), so parallel trials and lazily realized per-pair gains are
// reproducible regardless of evaluation order.
class CounterRng {
public:
  CounterRng(std::uint64_t seed, std::uint64_t k1 = 0, std::uint64_t k2 = 0,
             std::uint64_t k3 = 0)
      : seed_(seed), k1_(k1), k2_(k2), k3_(k3) {}

  std::uint64_t next_u64() {
    std::uint64_t x = mix(seed_ ^ 0x6a09e667f3bcc909ULL);
    x = mix(x ^ k1_);
    x = mix(x ^ k2_);
    x = mix(x ^ k3_);
    x = mix(x ^ counter_++);
    return x;
  }

  // uniform on (0,1), 53-bit mantissa, never returns 0 or 1
  double uniform01() {
    const std::uint64_t u = next_u64() >> 11;
    return (static_cast<double>(u) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  double exponential(double mean = 1.0) { return -mean * std::log(uniform01()); }

  double normal(double mu = 0.0, double sigma = 1.0) {
    if (have_spare_) {
      have_spare_ = false;
      return mu + sigma * spare_;
    }
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return mu + sigma * r * std::cos(a);
  }

  double lognormal(double mu, double sigma) { return std::exp(normal(mu, sigma)); }

  // Poisson sampling: multiplication method for small means, PTRS
  // (Hoermann's transformed rejection with squeeze) for large ones.
  std::uint64_t poisson(double mean) {
    if (!(mean >= 0.0)) throw std::invalid_argument("poisson: mean must be >= 0");
    if (mean == 0.0) return 0;
    if (mean < 30.0) {
      const double limit = std::exp(-mean);
      std::uint64_t n = 0;
      double prod = uniform01();
      while (prod > limit) {
        ++n;
        prod *= uniform01();
      }
      return n;
    }
    return poisson_ptrs(mean);
  }

private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t poisson_ptrs(double mean) {
    const double b = 0.931 + 2.53 * std::sqrt(mean);
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    const double log_mean = std::log(mean);
    for (;;) {
      const double u = uniform01() - 0.5;
      const double v = uniform01();
      const double us = 0.5 - std::fabs(u);
      const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
      if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(k);
      if (k < 0.0 || (us < 0.013 && v > us)) continue;
      if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
          k * log_mean - mean - std::lgamma(k + 1.0)) {
        return static_cast<std::uint64_t>(k);
      }
    }
  }

  std::uint64_t seed_, k1_, k2_, k3_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Stream key conventions used by the simulator. Keeping them in one place
// guarantees distinct purposes never collide on the same stream.
namespace stream {
inline constexpr std::uint64_t bs_points = 1;
inline constexpr std::uint64_t user_points = 2;
inline constexpr std::uint64_t pair_gain = 3;
inline constexpr std::uint64_t probe_gain = 4;
inline constexpr std::uint64_t interference_gain = 5;
inline constexpr std::uint64_t probe_association = 6;
inline constexpr std::uint64_t probes = 7;
inline constexpr std::uint64_t conservation = 8;
}  // namespace stream

}  // namespace greencells
