#pragma once

// Counter-derived random streams.
//
// Every random quantity in the library is drawn from a SplitMix64 stream
// whose seed is derived from (master seed, index). Work items such as
// bootstrap replicates or simulated streams can then be evaluated in any
// order, or on any number of threads, with identical results.

#include <cstdint>
#include <limits>
#include <random>

namespace abba {

class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1) with 53 bits of resolution.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) noexcept { return uniform() < p; }

 private:
  std::uint64_t state_;
};

// Mixes a master seed with a work-item index into an independent stream seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  SplitMix64 a(master ^ 0x6a09e667f3bcc909ULL);
  std::uint64_t s = a();
  SplitMix64 b(s + index * 0xd1b54a32d192ed03ULL);
  return b();
}

inline SplitMix64 stream_for(std::uint64_t master, std::uint64_t index) noexcept {
  return SplitMix64(derive_seed(master, index));
}

// Beta(a, b) via the ratio of two Gamma draws.
template <class Urbg>
double sample_beta(Urbg& rng, double a, double b) {
  std::gamma_distribution<double> ga(a, 1.0);
  std::gamma_distribution<double> gb(b, 1.0);
  const double x = ga(rng);
  const double y = gb(rng);
  return x / (x + y);
}

}  // namespace abba
