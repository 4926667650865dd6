#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "emspec/grid.hpp"
#include "emspec/signal.hpp"

namespace emspec {

inline constexpr std::size_t kImageSize = 512;
inline constexpr double kDbFloor = 1e-12;

/// Periodic Hann window of window_length samples, zero-padded to nfft,
/// advanced by hop samples per frame.
struct StftConfig {
  std::size_t nfft = 1024;
  std::size_t window_length = 256;
  std::size_t hop = 128;

  void validate() const;
  std::size_t frame_count(std::size_t n_samples) const;
  std::vector<double> window() const;
};

/// 512x512 image in [0, 1]. Column x spans frequency, row y spans time
/// (row 0 earliest).
struct SpectrogramImage {
  Grid<double> pixels;
  double f_min_hz = -kBandEdgeHz;
  double hz_per_px = kCaptureRateHz / kImageSize;
  double t_min_s = 0.0;
  double s_per_px = kCaptureDurationS / kImageSize;
};

/// Rows are frames; each row is fftshift(DFT_nfft(window * segment)), so
/// DC lands in column nfft/2.
Grid<std::complex<double>> stft(const IqBuffer& iq, const StftConfig& cfg = {});

/// 10 log10(|X|^2 + 1e-12).
Grid<double> power_db(const Grid<std::complex<double>>& spectrum);

/// Separable Catmull-Rom (a = -0.5) resize with edge clamping and
/// pixel-center alignment. When shrinking an axis the kernel is stretched by
/// the scale factor so every input sample contributes (antialiasing).
Grid<double> resize_bicubic(const Grid<double>& in, std::size_t out_rows = kImageSize,
                            std::size_t out_cols = kImageSize);

/// (x - min) / (max - min); a constant input maps to all zeros.
SpectrogramImage normalize01(const Grid<double>& in);

/// normalize01(resize_bicubic(power_db(stft(iq)))) computed frame by frame
/// without holding the full STFT. Bitwise identical to the composition.
SpectrogramImage render_spectrogram(const IqBuffer& iq, const StftConfig& cfg = {});

/// Catmull-Rom cubic convolution kernel.
double catmull_rom(double x);

}  // namespace emspec
