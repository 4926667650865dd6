#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <initializer_list>

namespace emspec {

/// SplitMix64 finalizer. Used both to expand seeds and to derive stream ids.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Derive an independent stream id from a parent seed and an index path,
/// e.g. derive_stream(master, {combo, config, realization}).
std::uint64_t derive_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

/// xoshiro256** generator with platform-independent distribution helpers.
///
/// The standard library distributions are implementation-defined, so every
/// variate used by the generator is produced here from raw 64-bit outputs.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next();

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform();
  /// Uniform on [lo, hi); returns lo exactly when lo == hi.
  double uniform(double lo, double hi);
  /// Unbiased integer on [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);
  /// Standard normal (Marsaglia polar method, both outputs used).
  double normal();
  /// Circular complex Gaussian with E|z|^2 = variance.
  std::complex<double> complex_normal(double variance);

 private:
  std::array<std::uint64_t, 4> s_{};
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace emspec
