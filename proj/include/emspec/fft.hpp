#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace emspec {

/// In-place iterative radix-2 FFT with precomputed twiddles.
///
/// Written out rather than delegated to an FFT library so that spectrogram
/// bytes do not depend on runtime SIMD dispatch or planner choices.
class Fft {
 public:
  /// n must be a power of two.
  explicit Fft(std::size_t n);

  std::size_t size() const { return n_; }

  /// X[k] = sum_n x[n] exp(-2 pi i k n / N), unnormalized.
  void forward(std::span<std::complex<double>> data) const;
  /// x[n] = sum_k X[k] exp(+2 pi i k n / N), unnormalized (no 1/N).
  void inverse(std::span<std::complex<double>> data) const;

 private:
  void transform(std::span<std::complex<double>> data, bool inverse) const;

  std::size_t n_;
  std::vector<std::size_t> bitrev_;
  std::vector<std::complex<double>> twiddles_;  // exp(-2 pi i k / N), k < N/2
};

}  // namespace emspec
