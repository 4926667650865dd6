#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace emspec {

/// A pulse sampled on a fine grid over [-half_span, +half_span] symbol
/// periods (half_span integral), evaluated by linear interpolation. Zero
/// outside its span.
class PulseTable {
 public:
  PulseTable(std::vector<double> values, std::size_t half_span, std::size_t resolution);

  double half_span() const { return static_cast<double>(half_span_); }
  std::size_t half_span_symbols() const { return half_span_; }
  std::size_t resolution() const { return resolution_; }
  const std::vector<double>& values() const { return values_; }

  double operator()(double t) const;

 private:
  std::vector<double> values_;
  std::size_t half_span_;
  std::size_t resolution_;
};

/// Root-raised-cosine impulse response, unit symbol period.
double rrc(double t, double rolloff);
PulseTable make_rrc_table(double rolloff, std::size_t half_span = 6, std::size_t resolution = 256);

/// Gaussian-filtered rectangular frequency pulse for GFSK (unit symbol
/// period). Integer shifts sum to one, so a constant bit stream produces
/// a constant frequency offset.
double gaussian_frequency_pulse(double t, double bt);
PulseTable make_gfsk_table(double bt, std::size_t half_span = 2, std::size_t resolution = 256);

/// Pulse-amplitude synthesis at an arbitrary (non-integer) ratio of sample
/// rate to symbol rate:
///
///   y[n] = sum_k a[k] p(n * symbol_rate / sample_rate + lead - k)
///
/// `lead` shifts the first output sample past the start-up transient.
template <class T>
std::vector<T> shape_pulses(std::span<const T> amplitudes, double symbol_rate, double sample_rate,
                            std::size_t n_out, const PulseTable& pulse, double lead);

/// Number of amplitudes shape_pulses reads for the given output length.
std::size_t symbols_needed(double symbol_rate, double sample_rate, std::size_t n_out, double lead,
                           double half_span);

/// Arbitrary-ratio interpolating resampler built on a polyphase table of a
/// Kaiser-windowed sinc prototype (cutoff at the input Nyquist rate).
class PolyphaseResampler {
 public:
  PolyphaseResampler(double in_rate_hz, double out_rate_hz, std::size_t taps = 32,
                     std::size_t phases = 512, double kaiser_beta = 8.0);

  /// Input samples needed to produce n_out outputs.
  std::size_t input_needed(std::size_t n_out) const;

  /// Output n is taken at input position n * in/out + taps/2, so the first
  /// output already has a full filter history.
  std::vector<std::complex<double>> process(std::span<const std::complex<double>> in,
                                            std::size_t n_out) const;

 private:
  double ratio_;  // input samples per output sample
  std::size_t taps_;
  std::size_t phases_;
  std::vector<double> table_;  // prototype sampled at 1/phases over [-taps/2, taps/2]
};

}  // namespace emspec
