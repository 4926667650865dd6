#include "emspec/geometry.hpp"

#include <algorithm>

#include "emspec/spectrogram.hpp"

namespace emspec {

double iou(const BoundingBox& a, const BoundingBox& b) {
  const double iw = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double ih = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

BoundingBox bbox_from_spec(const SignalSpec& s) {
  constexpr double px = static_cast<double>(kImageSize);
  auto clamp = [px](double v) { return std::clamp(v, 0.0, px); };
  BoundingBox b;
  b.x_min = clamp((s.center_freq_hz - s.bandwidth_hz / 2 + kBandEdgeHz) / kCaptureRateHz * px);
  b.x_max = clamp((s.center_freq_hz + s.bandwidth_hz / 2 + kBandEdgeHz) / kCaptureRateHz * px);
  b.y_min = clamp(s.arrival_s / kCaptureDurationS * px);
  b.y_max = clamp((s.arrival_s + s.duration_s) / kCaptureDurationS * px);
  return b;
}

}  // namespace emspec
