#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace emspec {

/// Capture geometry shared by every scene.
inline constexpr double kCaptureRateHz = 1e8;
inline constexpr double kCaptureDurationS = 0.05;
inline constexpr std::size_t kCaptureSamples = 5'000'000;
inline constexpr double kBandEdgeHz = 0.5 * kCaptureRateHz;

/// Class ids are the label-file class column, in this fixed order.
enum class SignalClass : int { DSSS = 0, BLE = 1, QAM = 2, AM = 3, FM = 4, WIFI = 5 };

inline constexpr std::array<SignalClass, 6> kAllClasses = {
    SignalClass::DSSS, SignalClass::BLE, SignalClass::QAM,
    SignalClass::AM,   SignalClass::FM,  SignalClass::WIFI};

std::string_view to_string(SignalClass c);
std::optional<SignalClass> parse_signal_class(std::string_view name);
inline int class_id(SignalClass c) { return static_cast<int>(c); }

struct SignalSpec {
  SignalClass cls = SignalClass::QAM;
  double center_freq_hz = 0.0;
  double bandwidth_hz = 1e6;
  double snr_db = 0.0;
  double arrival_s = 0.0;
  double duration_s = 0.0;
  /// Seed of the stream that drives this signal's random content.
  std::uint64_t stream_id = 0;

  bool operator==(const SignalSpec&) const = default;
};

/// Throws std::invalid_argument naming the first violated invariant.
void validate(const SignalSpec& spec);

/// Number of capture samples a signal of the given duration occupies.
std::size_t sample_count(double duration_s, double sample_rate_hz = kCaptureRateHz);

struct IqBuffer {
  std::vector<std::complex<double>> samples;
  double sample_rate_hz = kCaptureRateHz;

  std::size_t size() const { return samples.size(); }
  double mean_power() const;

  bool operator==(const IqBuffer&) const = default;
};

/// White noise, flat across the full capture band.
struct NoiseModel {
  /// Noise power per Hz. The default puts 1.0 total power in 100 MHz.
  double psd = 1.0 / kCaptureRateHz;

  double total_power(double sample_rate_hz = kCaptureRateHz) const { return psd * sample_rate_hz; }
};

}  // namespace emspec
