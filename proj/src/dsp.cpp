#include "emspec/dsp.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace emspec {

using std::numbers::pi;

PulseTable::PulseTable(std::vector<double> values, std::size_t half_span, std::size_t resolution)
    : values_(std::move(values)), half_span_(half_span), resolution_(resolution) {
  if (half_span == 0 || resolution == 0 || values_.size() != 2 * half_span * resolution + 1) {
    throw std::invalid_argument("PulseTable: value count does not match span and resolution");
  }
}

double PulseTable::operator()(double t) const {
  const double half = half_span();
  if (t <= -half || t >= half) return 0.0;
  const double x = (t + half) * static_cast<double>(resolution_);
  const auto i = static_cast<std::size_t>(x);
  const double frac = x - static_cast<double>(i);
  if (i + 1 >= values_.size()) return values_.back();
  return values_[i] + frac * (values_[i + 1] - values_[i]);
}

double rrc(double t, double beta) {
  if (std::abs(t) < 1e-12) return 1.0 - beta + 4.0 * beta / pi;
  if (beta > 0.0 && std::abs(std::abs(t) - 1.0 / (4.0 * beta)) < 1e-9) {
    return beta / std::sqrt(2.0) *
           ((1.0 + 2.0 / pi) * std::sin(pi / (4.0 * beta)) + (1.0 - 2.0 / pi) * std::cos(pi / (4.0 * beta)));
  }
  const double num = std::sin(pi * t * (1.0 - beta)) + 4.0 * beta * t * std::cos(pi * t * (1.0 + beta));
  const double den = pi * t * (1.0 - (4.0 * beta * t) * (4.0 * beta * t));
  return num / den;
}

namespace {

PulseTable tabulate(std::size_t half_span, std::size_t resolution, auto&& fn) {
  const std::size_t n = 2 * half_span * resolution + 1;
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = fn(-static_cast<double>(half_span) + static_cast<double>(i) / static_cast<double>(resolution));
  }
  return PulseTable(std::move(v), half_span, resolution);
}

double bessel_i0(double x) {
  double sum = 1.0;
  double term = 1.0;
  for (int k = 1; k < 64; ++k) {
    term *= (x / (2.0 * k)) * (x / (2.0 * k));
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return sum;
}

}  // namespace

PulseTable make_rrc_table(double rolloff, std::size_t half_span, std::size_t resolution) {
  return tabulate(half_span, resolution, [rolloff](double t) { return rrc(t, rolloff); });
}

double gaussian_frequency_pulse(double t, double bt) {
  // Rect of one symbol convolved with a Gaussian of bandwidth-time product bt.
  const double sigma = std::sqrt(std::log(2.0)) / (2.0 * pi * bt);
  const double k = 1.0 / (std::sqrt(2.0) * sigma);
  return 0.5 * (std::erf(k * (t + 0.5)) - std::erf(k * (t - 0.5)));
}

PulseTable make_gfsk_table(double bt, std::size_t half_span, std::size_t resolution) {
  return tabulate(half_span, resolution, [bt](double t) { return gaussian_frequency_pulse(t, bt); });
}

std::size_t symbols_needed(double symbol_rate, double sample_rate, std::size_t n_out, double lead,
                           double half_span) {
  if (n_out == 0) return 0;
  const double last = static_cast<double>(n_out - 1) * symbol_rate / sample_rate + lead + half_span;
  return static_cast<std::size_t>(std::floor(last)) + 1;
}

template <class T>
std::vector<T> shape_pulses(std::span<const T> amplitudes, double symbol_rate, double sample_rate,
                            std::size_t n_out, const PulseTable& pulse, double lead) {
  std::vector<T> out(n_out, T{});
  const double step = symbol_rate / sample_rate;
  const auto half = static_cast<long long>(pulse.half_span_symbols());
  const auto res = static_cast<long long>(pulse.resolution());
  const double* table = pulse.values().data();
  const auto count = static_cast<long long>(amplitudes.size());
  for (std::size_t n = 0; n < n_out; ++n) {
    // Every tap sits at the same fractional offset from the table grid, so
    // one interpolation weight serves the whole sum.
    const double pos = static_cast<double>(n) * step + lead;
    const double base_f = std::floor(pos);
    const auto base = static_cast<long long>(base_f);
    const double fine = (pos - base_f) * static_cast<double>(res);
    const double fine_floor = std::floor(fine);
    const auto i0 = static_cast<long long>(fine_floor);
    const double w = fine - fine_floor;
    // Tap k has t = pos - k = (base - k) + frac, inside (-half, half).
    long long k_lo = base - half + 1;
    long long k_hi = base + half - (i0 == 0 && w == 0.0 ? 1 : 0);
    if (k_lo < 0) k_lo = 0;
    if (k_hi > count - 1) k_hi = count - 1;
    T acc{};
    for (long long k = k_lo; k <= k_hi; ++k) {
      const long long idx = (base - k + half) * res + i0;
      const double p = table[idx] + w * (table[idx + 1] - table[idx]);
      acc += amplitudes[static_cast<std::size_t>(k)] * p;
    }
    out[n] = acc;
  }
  return out;
}

template std::vector<double> shape_pulses<double>(std::span<const double>, double, double, std::size_t,
                                                  const PulseTable&, double);
template std::vector<std::complex<double>> shape_pulses<std::complex<double>>(
    std::span<const std::complex<double>>, double, double, std::size_t, const PulseTable&, double);

PolyphaseResampler::PolyphaseResampler(double in_rate_hz, double out_rate_hz, std::size_t taps,
                                       std::size_t phases, double kaiser_beta)
    : ratio_(in_rate_hz / out_rate_hz), taps_(taps), phases_(phases) {
  if (!(in_rate_hz > 0.0) || !(out_rate_hz > 0.0)) throw std::invalid_argument("resampler: rates must be positive");
  if (in_rate_hz > out_rate_hz) throw std::invalid_argument("resampler: only interpolation is supported");
  if (taps < 4 || taps % 2 != 0 || phases < 2) throw std::invalid_argument("resampler: bad filter geometry");
  const double half = static_cast<double>(taps) / 2.0;
  const std::size_t n = taps * phases + 1;
  table_.resize(n);
  const double norm = bessel_i0(kaiser_beta);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = -half + static_cast<double>(i) / static_cast<double>(phases);
    const double sinc = std::abs(t) < 1e-15 ? 1.0 : std::sin(pi * t) / (pi * t);
    const double r = t / half;
    const double w = r * r >= 1.0 ? 0.0 : bessel_i0(kaiser_beta * std::sqrt(1.0 - r * r)) / norm;
    table_[i] = sinc * w;
  }
}

std::size_t PolyphaseResampler::input_needed(std::size_t n_out) const {
  if (n_out == 0) return 0;
  const double last = static_cast<double>(n_out - 1) * ratio_ + static_cast<double>(taps_);
  return static_cast<std::size_t>(std::floor(last)) + 1;
}

std::vector<std::complex<double>> PolyphaseResampler::process(std::span<const std::complex<double>> in,
                                                              std::size_t n_out) const {
  std::vector<std::complex<double>> out(n_out);
  const auto half = static_cast<long long>(taps_ / 2);
  const auto phases = static_cast<long long>(phases_);
  const auto count = static_cast<long long>(in.size());
  const double* table = table_.data();
  for (std::size_t n = 0; n < n_out; ++n) {
    const double x = static_cast<double>(n) * ratio_ + static_cast<double>(half);
    const double base_f = std::floor(x);
    const auto base = static_cast<long long>(base_f);
    const double fine = (x - base_f) * static_cast<double>(phases_);
    const double fine_floor = std::floor(fine);
    const auto i0 = static_cast<long long>(fine_floor);
    const double w = fine - fine_floor;
    double re = 0.0;
    double im = 0.0;
    // Tap for input base + m sits at t = frac - m; all taps share weight w.
    for (long long m = -half + 1; m <= half; ++m) {
      const long long j = base + m;
      if (j < 0 || j >= count) continue;
      const long long idx = (half - m) * phases + i0;
      const double h = table[idx] + w * (table[idx + 1] - table[idx]);
      re += h * in[static_cast<std::size_t>(j)].real();
      im += h * in[static_cast<std::size_t>(j)].imag();
    }
    out[n] = {re, im};
  }
  return out;
}

}  // namespace emspec
