#include "emspec/signal.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace emspec {

namespace {

constexpr std::array<std::string_view, 6> kClassNames = {"DSSS", "BLE", "QAM", "AM", "FM", "WIFI"};

// Absorbs representation error when arrival + duration is drawn to land
// exactly on the capture end.
constexpr double kTimeSlackS = 1e-12;
constexpr double kFreqSlackHz = 1e-6;

[[noreturn]] void reject(const std::string& what) { throw std::invalid_argument("invalid signal spec: " + what); }

}  // namespace

std::string_view to_string(SignalClass c) { return kClassNames.at(static_cast<std::size_t>(c)); }

std::optional<SignalClass> parse_signal_class(std::string_view name) {
  for (std::size_t i = 0; i < kClassNames.size(); ++i) {
    if (kClassNames[i] == name) return static_cast<SignalClass>(i);
  }
  return std::nullopt;
}

void validate(const SignalSpec& s) {
  const double values[] = {s.center_freq_hz, s.bandwidth_hz, s.snr_db, s.arrival_s, s.duration_s};
  for (double v : values) {
    if (!std::isfinite(v)) reject("non-finite field");
  }
  if (static_cast<int>(s.cls) < 0 || static_cast<int>(s.cls) >= 6) reject("unknown class");
  if (!(s.bandwidth_hz > 0.0)) reject("bandwidth must be positive");
  if (s.bandwidth_hz > kCaptureRateHz) reject("bandwidth exceeds 100 MHz");
  if (s.center_freq_hz - s.bandwidth_hz / 2 < -kBandEdgeHz - kFreqSlackHz ||
      s.center_freq_hz + s.bandwidth_hz / 2 > kBandEdgeHz + kFreqSlackHz) {
    reject("band extends outside +/-50 MHz");
  }
  if (s.arrival_s < 0.0) reject("negative arrival time");
  if (!(s.duration_s > 0.0)) reject("duration must be positive");
  if (s.arrival_s + s.duration_s > kCaptureDurationS + kTimeSlackS) reject("arrival + duration exceeds 50 ms");
}

std::size_t sample_count(double duration_s, double sample_rate_hz) {
  return static_cast<std::size_t>(std::llround(duration_s * sample_rate_hz));
}

double IqBuffer::mean_power() const {
  if (samples.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& x : samples) acc += std::norm(x);
  return acc / static_cast<double>(samples.size());
}

}  // namespace emspec
