#include "emspec/energy_detector.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace emspec {

void EnergyDetectorConfig::validate() const {
  if (half_time < 0 || half_freq < 0) throw std::invalid_argument("smoothing half-widths must be >= 0");
  if (!(k > 0.0)) throw std::invalid_argument("threshold k must be > 0");
  if (connectivity != 4 && connectivity != 8) throw std::invalid_argument("connectivity must be 4 or 8");
  if (min_area < 1) throw std::invalid_argument("min_area must be >= 1");
}

namespace {

double lower_median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median of empty image");
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>((v.size() - 1) / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

}  // namespace

NoiseFloor estimate_noise_floor(const Grid<double>& image) {
  NoiseFloor nf;
  nf.floor = lower_median(image.data());
  std::vector<double> dev(image.size());
  for (std::size_t i = 0; i < image.size(); ++i) dev[i] = std::abs(image.data()[i] - nf.floor);
  nf.spread = 1.4826 * lower_median(std::move(dev));
  return nf;
}

Grid<double> box_filter(const Grid<double>& image, int half_rows, int half_cols) {
  const auto rows = static_cast<long>(image.rows());
  const auto cols = static_cast<long>(image.cols());
  Grid<double> tmp(image.rows(), image.cols());
  for (long r = 0; r < rows; ++r) {
    for (long c = 0; c < cols; ++c) {
      double s = 0.0;
      for (long d = -half_cols; d <= half_cols; ++d) s += image(r, std::clamp(c + d, 0L, cols - 1));
      tmp(r, c) = s / (2 * half_cols + 1);
    }
  }
  Grid<double> out(image.rows(), image.cols());
  for (long r = 0; r < rows; ++r) {
    for (long c = 0; c < cols; ++c) {
      double s = 0.0;
      for (long d = -half_rows; d <= half_rows; ++d) s += tmp(std::clamp(r + d, 0L, rows - 1), c);
      out(r, c) = s / (2 * half_rows + 1);
    }
  }
  return out;
}

Grid<int> label_components(const Grid<unsigned char>& mask, int connectivity) {
  const auto rows = static_cast<long>(mask.rows());
  const auto cols = static_cast<long>(mask.cols());
  Grid<int> labels(mask.rows(), mask.cols(), 0);
  std::vector<std::pair<long, long>> stack;
  int next = 0;
  for (long r0 = 0; r0 < rows; ++r0) {
    for (long c0 = 0; c0 < cols; ++c0) {
      if (!mask(r0, c0) || labels(r0, c0)) continue;
      ++next;
      labels(r0, c0) = next;
      stack.push_back({r0, c0});
      while (!stack.empty()) {
        const auto [r, c] = stack.back();
        stack.pop_back();
        for (long dr = -1; dr <= 1; ++dr) {
          for (long dc = -1; dc <= 1; ++dc) {
            if (dr == 0 && dc == 0) continue;
            if (connectivity == 4 && dr != 0 && dc != 0) continue;
            const long rr = r + dr;
            const long cc = c + dc;
            if (rr < 0 || rr >= rows || cc < 0 || cc >= cols) continue;
            if (!mask(rr, cc) || labels(rr, cc)) continue;
            labels(rr, cc) = next;
            stack.push_back({rr, cc});
          }
        }
      }
    }
  }
  return labels;
}

namespace {

struct Component {
  std::size_t r0 = SIZE_MAX, c0 = SIZE_MAX, r1 = 0, c1 = 0;
  std::size_t n = 0;
  double sum = 0.0;
};

struct Segmentation {
  Grid<int> labels;
  double threshold = 0.0;
  std::vector<Component> components;
};

Segmentation segment(const Grid<double>& image, const EnergyDetectorConfig& cfg) {
  cfg.validate();
  if (image.empty()) throw std::invalid_argument("detect: empty image");
  Segmentation seg;
  const NoiseFloor nf = estimate_noise_floor(image);
  seg.threshold = nf.floor + cfg.k * nf.spread;

  const Grid<double> smooth = box_filter(image, cfg.half_time, cfg.half_freq);
  Grid<unsigned char> mask(image.rows(), image.cols(), 0);
  for (std::size_t i = 0; i < image.size(); ++i) mask.data()[i] = smooth.data()[i] > seg.threshold ? 1 : 0;
  seg.labels = label_components(mask, cfg.connectivity);

  for (std::size_t r = 0; r < image.rows(); ++r) {
    for (std::size_t c = 0; c < image.cols(); ++c) {
      const int l = seg.labels(r, c);
      if (l == 0) continue;
      if (static_cast<std::size_t>(l) > seg.components.size()) seg.components.resize(static_cast<std::size_t>(l));
      const double v = image(r, c);
      // Smoothing spreads a component past the signal; keep only the raw
      // pixels that clear the threshold themselves.
      if (!(v > seg.threshold)) continue;
      Component& a = seg.components[static_cast<std::size_t>(l) - 1];
      a.r0 = std::min(a.r0, r);
      a.c0 = std::min(a.c0, c);
      a.r1 = std::max(a.r1, r);
      a.c1 = std::max(a.c1, c);
      ++a.n;
      a.sum += v;
    }
  }
  return seg;
}

}  // namespace

Grid<unsigned char> foreground(const Grid<double>& image, const EnergyDetectorConfig& cfg) {
  const Segmentation seg = segment(image, cfg);
  Grid<unsigned char> out(image.rows(), image.cols(), 0);
  for (std::size_t i = 0; i < image.size(); ++i) {
    const int l = seg.labels.data()[i];
    if (l == 0 || !(image.data()[i] > seg.threshold)) continue;
    if (seg.components[static_cast<std::size_t>(l) - 1].n >= static_cast<std::size_t>(cfg.min_area)) out.data()[i] = 1;
  }
  return out;
}

std::vector<Detection> detect(const Grid<double>& image, const EnergyDetectorConfig& cfg) {
  const Segmentation seg = segment(image, cfg);
  std::vector<Detection> out;
  for (const Component& a : seg.components) {
    if (a.n < static_cast<std::size_t>(cfg.min_area)) continue;
    Detection d;
    d.class_id = 0;
    d.box = {static_cast<double>(a.c0), static_cast<double>(a.r0), static_cast<double>(a.c1 + 1),
             static_cast<double>(a.r1 + 1)};
    d.score = std::clamp(a.sum / static_cast<double>(a.n), 0.0, 1.0);
    out.push_back(d);
  }
  return out;
}

}  // namespace emspec
