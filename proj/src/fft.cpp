#include "emspec/fft.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace emspec {

Fft::Fft(std::size_t n) : n_(n) {
  if (n == 0 || (n & (n - 1)) != 0) throw std::invalid_argument("Fft: size must be a power of two");
  std::size_t bits = 0;
  while ((std::size_t{1} << bits) < n) ++bits;
  bitrev_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t r = 0;
    for (std::size_t b = 0; b < bits; ++b) {
      if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (bits - 1 - b);
    }
    bitrev_[i] = r;
  }
  twiddles_.resize(n / 2);
  for (std::size_t k = 0; k < n / 2; ++k) {
    const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    twiddles_[k] = {std::cos(angle), std::sin(angle)};
  }
}

void Fft::forward(std::span<std::complex<double>> data) const { transform(data, false); }

void Fft::inverse(std::span<std::complex<double>> data) const { transform(data, true); }

void Fft::transform(std::span<std::complex<double>> data, bool inverse) const {
  if (data.size() != n_) throw std::invalid_argument("Fft: buffer size mismatch");
  for (std::size_t i = 0; i < n_; ++i) {
    if (i < bitrev_[i]) std::swap(data[i], data[bitrev_[i]]);
  }
  for (std::size_t len = 2; len <= n_; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t stride = n_ / len;
    for (std::size_t start = 0; start < n_; start += len) {
      for (std::size_t j = 0; j < half; ++j) {
        std::complex<double> w = twiddles_[j * stride];
        if (inverse) w = std::conj(w);
        std::complex<double>& a = data[start + j];
        std::complex<double>& b = data[start + j + half];
        // Explicit real arithmetic; std::complex operator* carries NaN
        // recovery branches that are slow and unnecessary here.
        const double br = b.real() * w.real() - b.imag() * w.imag();
        const double bi = b.real() * w.imag() + b.imag() * w.real();
        const double ar = a.real();
        const double ai = a.imag();
        a = {ar + br, ai + bi};
        b = {ar - br, ai - bi};
      }
    }
  }
}

}  // namespace emspec
