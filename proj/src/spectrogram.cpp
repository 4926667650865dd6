#include "emspec/spectrogram.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "emspec/fft.hpp"

namespace emspec {

namespace {

using cd = std::complex<double>;

struct Tap {
  std::size_t index;
  double weight;
};

/// Per-output (input index, weight) lists for one axis, with clamped
/// duplicates merged and weights normalized to sum to one. Taps are sorted
/// by input index.
std::vector<std::vector<Tap>> axis_kernel(std::size_t in_size, std::size_t out_size) {
  const double scale = static_cast<double>(in_size) / static_cast<double>(out_size);
  const double stretch = std::max(1.0, scale);
  const double support = 2.0 * stretch;
  std::vector<std::vector<Tap>> out(out_size);
  const auto last = static_cast<long long>(in_size) - 1;
  for (std::size_t o = 0; o < out_size; ++o) {
    const double center = (static_cast<double>(o) + 0.5) * scale - 0.5;
    const auto lo = static_cast<long long>(std::floor(center - support)) + 1;
    const auto hi = static_cast<long long>(std::ceil(center + support)) - 1;
    std::vector<Tap>& taps = out[o];
    double sum = 0.0;
    for (long long j = lo; j <= hi; ++j) {
      const double w = catmull_rom((center - static_cast<double>(j)) / stretch);
      const auto idx = static_cast<std::size_t>(std::clamp(j, 0LL, last));
      if (!taps.empty() && taps.back().index == idx) {
        taps.back().weight += w;
      } else {
        taps.push_back({idx, w});
      }
      sum += w;
    }
    for (Tap& t : taps) t.weight /= sum;
  }
  return out;
}

void check_resize_input(const Grid<double>& in) {
  if (in.rows() < 4) throw std::invalid_argument("resize_bicubic: need at least 4 frames");
  if (in.cols() < 1) throw std::invalid_argument("resize_bicubic: empty rows");
}

Grid<double> resize_columns(const Grid<double>& tall, std::size_t out_cols) {
  const auto col_kernel = axis_kernel(tall.cols(), out_cols);
  Grid<double> out(tall.rows(), out_cols);
  for (std::size_t r = 0; r < tall.rows(); ++r) {
    const auto row = tall.row(r);
    for (std::size_t c = 0; c < out_cols; ++c) {
      double acc = 0.0;
      for (const Tap& t : col_kernel[c]) acc += t.weight * row[t.index];
      out(r, c) = acc;
    }
  }
  return out;
}

/// Streams input rows into the vertical pass of the resize; contributions
/// to each output row arrive in ascending input order.
class RowResizer {
 public:
  RowResizer(std::size_t in_rows, std::size_t cols, std::size_t out_rows)
      : kernel_(axis_kernel(in_rows, out_rows)), acc_(out_rows, cols, 0.0) {}

  void push(std::size_t in_row, std::span<const double> values) {
    while (first_ < kernel_.size() && kernel_[first_].back().index < in_row) ++first_;
    for (std::size_t o = first_; o < kernel_.size(); ++o) {
      const auto& taps = kernel_[o];
      if (taps.front().index > in_row) break;
      // Merged taps cover a contiguous index range.
      const Tap& t = taps[in_row - taps.front().index];
      auto dst = acc_.row(o);
      for (std::size_t c = 0; c < values.size(); ++c) dst[c] += t.weight * values[c];
    }
  }

  Grid<double>& result() { return acc_; }

 private:
  std::vector<std::vector<Tap>> kernel_;
  Grid<double> acc_;
  std::size_t first_ = 0;
};

class FrameTransform {
 public:
  explicit FrameTransform(const StftConfig& cfg) : cfg_(cfg), fft_(cfg.nfft), window_(cfg.window()), buf_(cfg.nfft) {}

  /// Writes fftshift(DFT(window * iq[start .. start + window_length))) to out.
  void run(const IqBuffer& iq, std::size_t start, std::span<cd> out) {
    std::fill(buf_.begin(), buf_.end(), cd{});
    for (std::size_t i = 0; i < cfg_.window_length; ++i) buf_[i] = iq.samples[start + i] * window_[i];
    fft_.forward(buf_);
    const std::size_t half = cfg_.nfft / 2;
    for (std::size_t k = 0; k < cfg_.nfft; ++k) out[k] = buf_[(k + half) % cfg_.nfft];
  }

 private:
  const StftConfig& cfg_;
  Fft fft_;
  std::vector<double> window_;
  std::vector<cd> buf_;
};

inline double to_db(cd x) { return 10.0 * std::log10(std::norm(x) + kDbFloor); }

}  // namespace

double catmull_rom(double x) {
  constexpr double a = -0.5;
  const double t = std::abs(x);
  if (t < 1.0) return ((a + 2.0) * t - (a + 3.0)) * t * t + 1.0;
  if (t < 2.0) return ((a * t - 5.0 * a) * t + 8.0 * a) * t - 4.0 * a;
  return 0.0;
}

void StftConfig::validate() const {
  if (nfft == 0 || (nfft & (nfft - 1)) != 0) throw std::invalid_argument("stft: nfft must be a power of two");
  if (hop == 0 || hop > window_length || window_length > nfft) {
    throw std::invalid_argument("stft: need 0 < hop <= window length <= nfft");
  }
}

std::size_t StftConfig::frame_count(std::size_t n) const {
  if (n < window_length) return 0;
  return (n - window_length) / hop + 1;
}

std::vector<double> StftConfig::window() const {
  std::vector<double> w(window_length);
  for (std::size_t i = 0; i < window_length; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(window_length));
  }
  return w;
}

Grid<cd> stft(const IqBuffer& iq, const StftConfig& cfg) {
  cfg.validate();
  if (iq.size() < cfg.window_length) throw std::invalid_argument("stft: buffer shorter than one window");
  const std::size_t frames = cfg.frame_count(iq.size());
  Grid<cd> out(frames, cfg.nfft);
  FrameTransform ft(cfg);
  for (std::size_t f = 0; f < frames; ++f) ft.run(iq, f * cfg.hop, out.row(f));
  return out;
}

Grid<double> power_db(const Grid<cd>& spectrum) {
  Grid<double> out(spectrum.rows(), spectrum.cols());
  for (std::size_t i = 0; i < spectrum.size(); ++i) out.data()[i] = to_db(spectrum.data()[i]);
  return out;
}

Grid<double> resize_bicubic(const Grid<double>& in, std::size_t out_rows, std::size_t out_cols) {
  check_resize_input(in);
  RowResizer rows(in.rows(), in.cols(), out_rows);
  for (std::size_t r = 0; r < in.rows(); ++r) rows.push(r, in.row(r));
  return resize_columns(rows.result(), out_cols);
}

SpectrogramImage normalize01(const Grid<double>& in) {
  SpectrogramImage img;
  img.pixels = Grid<double>(in.rows(), in.cols(), 0.0);
  if (in.empty()) return img;
  const auto [lo_it, hi_it] = std::minmax_element(in.data().begin(), in.data().end());
  const double lo = *lo_it;
  const double range = *hi_it - lo;
  if (!(range > 0.0)) return img;
  for (std::size_t i = 0; i < in.size(); ++i) img.pixels.data()[i] = (in.data()[i] - lo) / range;
  return img;
}

SpectrogramImage render_spectrogram(const IqBuffer& iq, const StftConfig& cfg) {
  cfg.validate();
  if (iq.size() < cfg.window_length) throw std::invalid_argument("stft: buffer shorter than one window");
  const std::size_t frames = cfg.frame_count(iq.size());
  if (frames < 4) throw std::invalid_argument("resize_bicubic: need at least 4 frames");

  FrameTransform ft(cfg);
  RowResizer rows(frames, cfg.nfft, kImageSize);
  std::vector<cd> spectrum(cfg.nfft);
  std::vector<double> db(cfg.nfft);
  for (std::size_t f = 0; f < frames; ++f) {
    ft.run(iq, f * cfg.hop, spectrum);
    for (std::size_t k = 0; k < cfg.nfft; ++k) db[k] = to_db(spectrum[k]);
    rows.push(f, db);
  }
  return normalize01(resize_columns(rows.result(), kImageSize));
}

}  // namespace emspec
