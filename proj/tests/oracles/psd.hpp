#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "naive_dft.hpp"

namespace oracle {

/// Averaged periodogram: non-overlapping Hann segments of length n,
/// direct DFT, fftshifted so bin n/2 is DC. O(n^2) per segment.
inline std::vector<double> welch_psd(const std::vector<std::complex<double>>& x, std::size_t n,
                                     std::size_t max_segments) {
  std::vector<double> psd(n, 0.0);
  std::size_t segs = 0;
  for (std::size_t start = 0; start + n <= x.size() && segs < max_segments; start += n, ++segs) {
    std::vector<std::complex<double>> seg(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
      seg[i] = x[start + i] * w;
    }
    const auto spec = naive_dft(seg);
    for (std::size_t k = 0; k < n; ++k) psd[(k + n / 2) % n] += std::norm(spec[k]);
  }
  for (double& v : psd) v /= static_cast<double>(std::max<std::size_t>(segs, 1));
  return psd;
}

/// Share of total power in bins [lo_bin, hi_bin].
inline double occupied_fraction_of_band(const std::vector<double>& psd, double lo_bin, double hi_bin) {
  double total = 0.0, inside = 0.0;
  for (std::size_t k = 0; k < psd.size(); ++k) {
    total += psd[k];
    if (static_cast<double>(k) >= lo_bin && static_cast<double>(k) <= hi_bin) inside += psd[k];
  }
  return inside / total;
}

}  // namespace oracle
