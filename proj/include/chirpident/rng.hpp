// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstdint>

namespace chirpident {

/// Counter-based pseudo-random generator. Output is a pure function of
/// (key, counter), so independent substreams can be derived from a root
/// seed and consumed in parallel without coordination.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}

  std::uint64_t next_u64() { return mix(key_ + golden * ++ctr_); }

  /// Uniform draw in [0, 1) with 53-bit resolution.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Circularly symmetric complex Gaussian with E|z|^2 = sigma2.
  std::complex<double> next_complex_gaussian(double sigma2);

  /// Deterministic substream key derived from a root seed and stream ids.
  static std::uint64_t substream(std::uint64_t seed, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0);

 private:
  static constexpr std::uint64_t golden = 0x9e3779b97f4a7c15ULL;

  // splitmix64 finalizer
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t ctr_ = 0;
};

}  // namespace chirpident
