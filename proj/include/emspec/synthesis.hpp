#pragma once

#include <filesystem>

#include "emspec/random.hpp"
#include "emspec/scene.hpp"
#include "emspec/signal.hpp"

namespace emspec {

/// Per-class modulation constants.
struct WaveformParams {
  static constexpr double kRrcRolloff = 0.35;
  static constexpr double kAmIndex = 0.5;
  static constexpr double kGfskBt = 0.5;
  static constexpr double kGfskIndex = 0.5;
  static constexpr int kDsssCodeLength = 127;
  static constexpr int kOfdmFft = 64;
  static constexpr int kOfdmActive = 52;
  static constexpr int kOfdmCyclicPrefix = 16;
  /// FM message rate as a fraction of the signal bandwidth.
  static constexpr double kFmMessageFraction = 1.0 / 16.0;
};

/// Symbol (or chip, or OFDM sample) rate used for a class at a bandwidth.
double symbol_rate(SignalClass cls, double bandwidth_hz);

/// Complex baseband for one signal at the capture rate, duration_s long,
/// normalized to unit mean power. Throws "degenerate bandwidth" when the
/// duration cannot carry the class's minimum symbol count.
IqBuffer synthesize_baseband(const SignalSpec& spec, Rng& rng);

/// Scales a unit-power signal to 10^(snr/10) * psd * bandwidth.
IqBuffer scale_to_snr(IqBuffer signal, const SignalSpec& spec, const NoiseModel& noise);

/// Adds `signal`, shifted to the spec's center frequency, into the capture
/// starting at round(arrival * rate). Samples outside are untouched.
IqBuffer place_in_capture(IqBuffer capture, const IqBuffer& signal, const SignalSpec& spec);

/// Sum of all placed signals (each from its own spec.stream_id) plus
/// complex white Gaussian noise drawn from `rng`.
IqBuffer compose_scene(const SceneConfig& config, const NoiseModel& noise, Rng& rng);

/// Header-less interleaved little-endian float32 I/Q.
void write_iq(const IqBuffer& buffer, const std::filesystem::path& path);
IqBuffer read_iq(const std::filesystem::path& path, double sample_rate_hz = kCaptureRateHz);

}  // namespace emspec
