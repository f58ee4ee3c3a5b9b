// rng.hpp -- counter-based pseudo-random generator.
//
// Each stream is identified by a 64-bit key; outputs are a stateless hash of
// (key, counter). Replicate streams derived from (seed, replicate index) are
// therefore reproducible regardless of thread scheduling.
#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>

namespace extcomp {

namespace detail {
inline std::uint64_t mix64(std::uint64_t z) {
  // SplitMix64 finalizer.
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}
}  // namespace detail

class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(detail::mix64(key ^ 0x6A09E667F3BCC909ULL)) {}

  // Derive a child stream key, e.g. per bootstrap replicate.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
    return detail::mix64(seed + 0x9E3779B97F4A7C15ULL * (stream + 1));
  }

  std::uint64_t next_u64() {
    return detail::mix64(key_ + 0x9E3779B97F4A7C15ULL * ++counter_);
  }

  // Uniform in [0, 1).
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n) {
    // Modulo bias is negligible for n << 2^64 (here n is a sample size).
    return next_u64() % n;
  }

  bool bernoulli(double p) { return next_double() < p; }

  // Index into a discrete distribution given by cumulative weights.
  // `cum` must be nondecreasing with cum.back() == 1 up to rounding.
  template <typename Vec>
  std::size_t categorical(const Vec& cum) {
    double u = next_double();
    std::size_t i = 0;
    while (i + 1 < cum.size() && u >= cum[i]) ++i;
    return i;
  }

  double normal() {
    // Box-Muller; one draw per call keeps the stream counter deterministic.
    double u1 = next_double();
    double u2 = next_double();
    if (u1 <= 0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace extcomp
