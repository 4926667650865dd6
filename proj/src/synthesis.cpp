#include "emspec/synthesis.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <stdexcept>
#include <string>

#include "emspec/dsp.hpp"
#include "emspec/fft.hpp"

namespace emspec {

namespace {

using cd = std::complex<double>;
using std::numbers::pi;
using P = WaveformParams;

// std::complex operator* carries NaN-recovery branches; these buffers are
// always finite.
inline cd cmul(cd a, cd b) {
  return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

const PulseTable& rrc_table() {
  static const PulseTable table = make_rrc_table(P::kRrcRolloff);
  return table;
}

const PulseTable& gfsk_table() {
  static const PulseTable table = make_gfsk_table(P::kGfskBt);
  return table;
}

double min_symbols(SignalClass cls) {
  switch (cls) {
    case SignalClass::DSSS: return P::kDsssCodeLength;
    case SignalClass::BLE: return 8.0;
    case SignalClass::WIFI: return P::kOfdmFft + P::kOfdmCyclicPrefix;
    default: return 1.0;
  }
}

// 127-chip maximal-length sequence from x^7 + x^6 + 1, as +/-1.
const std::vector<double>& pn_sequence() {
  static const std::vector<double> seq = [] {
    std::vector<double> out;
    unsigned reg = 0x7F;
    for (int i = 0; i < P::kDsssCodeLength; ++i) {
      const unsigned bit = ((reg >> 6) ^ (reg >> 5)) & 1U;
      out.push_back((reg & 1U) ? 1.0 : -1.0);
      reg = ((reg << 1) | bit) & 0x7FU;
    }
    return out;
  }();
  return seq;
}

std::vector<double> gaussian_message(double rate, std::size_t n, Rng& rng) {
  const PulseTable& pulse = rrc_table();
  const double lead = pulse.half_span();
  std::vector<double> amps(symbols_needed(rate, kCaptureRateHz, n, lead, pulse.half_span()));
  for (double& a : amps) a = rng.normal();
  std::vector<double> m = shape_pulses<double>(amps, rate, kCaptureRateHz, n, pulse, lead);
  double power = 0.0;
  for (double v : m) power += v * v;
  power /= static_cast<double>(n);
  if (power > 0.0) {
    const double g = 1.0 / std::sqrt(power);
    for (double& v : m) v *= g;
  }
  return m;
}

// Integrates instantaneous frequency (Hz) into a unit-modulus carrier.
std::vector<cd> integrate_frequency(const std::vector<double>& freq_hz) {
  std::vector<cd> out(freq_hz.size());
  double phase = 0.0;
  const double k = 2.0 * pi / kCaptureRateHz;
  for (std::size_t i = 0; i < freq_hz.size(); ++i) {
    out[i] = {std::cos(phase), std::sin(phase)};
    phase += k * freq_hz[i];
  }
  return out;
}

std::vector<cd> qam16(const SignalSpec& spec, std::size_t n, Rng& rng) {
  static constexpr double kLevels[] = {-3.0, -1.0, 1.0, 3.0};
  const PulseTable& pulse = rrc_table();
  const double rate = symbol_rate(spec.cls, spec.bandwidth_hz);
  const double lead = pulse.half_span();
  std::vector<cd> symbols(symbols_needed(rate, kCaptureRateHz, n, lead, pulse.half_span()));
  for (cd& s : symbols) {
    const double i = kLevels[rng.below(4)];
    const double q = kLevels[rng.below(4)];
    s = cd(i, q) / std::sqrt(10.0);
  }
  return shape_pulses<cd>(symbols, rate, kCaptureRateHz, n, pulse, lead);
}

std::vector<cd> dsss(const SignalSpec& spec, std::size_t n, Rng& rng) {
  const PulseTable& pulse = rrc_table();
  const std::vector<double>& code = pn_sequence();
  const double rate = symbol_rate(spec.cls, spec.bandwidth_hz);
  const double lead = pulse.half_span();
  std::vector<double> chips(symbols_needed(rate, kCaptureRateHz, n, lead, pulse.half_span()));
  double bit = 1.0;
  for (std::size_t k = 0; k < chips.size(); ++k) {
    if (k % code.size() == 0) bit = (rng.next() >> 63) ? 1.0 : -1.0;
    chips[k] = bit * code[k % code.size()];
  }
  const std::vector<double> baseband = shape_pulses<double>(chips, rate, kCaptureRateHz, n, pulse, lead);
  return {baseband.begin(), baseband.end()};
}

std::vector<cd> gfsk(const SignalSpec& spec, std::size_t n, Rng& rng) {
  const PulseTable& pulse = gfsk_table();
  const double rate = symbol_rate(spec.cls, spec.bandwidth_hz);
  const double lead = pulse.half_span();
  std::vector<double> bits(symbols_needed(rate, kCaptureRateHz, n, lead, pulse.half_span()));
  for (double& b : bits) b = (rng.next() >> 63) ? 1.0 : -1.0;
  std::vector<double> freq = shape_pulses<double>(bits, rate, kCaptureRateHz, n, pulse, lead);
  const double deviation = P::kGfskIndex * rate / 2.0;
  for (double& f : freq) f *= deviation;
  return integrate_frequency(freq);
}

std::vector<cd> am(const SignalSpec& spec, std::size_t n, Rng& rng) {
  const std::vector<double> m = gaussian_message(symbol_rate(spec.cls, spec.bandwidth_hz), n, rng);
  std::vector<cd> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = 1.0 + P::kAmIndex * m[i];
  return out;
}

std::vector<cd> fm(const SignalSpec& spec, std::size_t n, Rng& rng) {
  std::vector<double> m = gaussian_message(symbol_rate(spec.cls, spec.bandwidth_hz), n, rng);
  // The Gaussian CDF maps the unit-power message to a uniform deviation over
  // +/- bw/2, so the peak deviation is exactly half the bandwidth.
  const double peak = spec.bandwidth_hz / 2.0;
  for (double& v : m) v = peak * std::erf(v / std::sqrt(2.0));
  return integrate_frequency(m);
}

std::vector<cd> ofdm(const SignalSpec& spec, std::size_t n, Rng& rng) {
  const double ofdm_rate = symbol_rate(spec.cls, spec.bandwidth_hz);
  const PolyphaseResampler resampler(ofdm_rate, kCaptureRateHz);
  const std::size_t n_in = resampler.input_needed(n);
  constexpr auto kFft = static_cast<std::size_t>(P::kOfdmFft);
  constexpr auto kCp = static_cast<std::size_t>(P::kOfdmCyclicPrefix);
  const std::size_t n_symbols = (n_in + kFft + kCp - 1) / (kFft + kCp);

  const Fft fft(kFft);
  std::vector<cd> baseband;
  baseband.reserve(n_symbols * (kFft + kCp));
  std::vector<cd> bins(kFft);
  const double amp = 1.0 / std::sqrt(2.0);
  for (std::size_t s = 0; s < n_symbols; ++s) {
    std::fill(bins.begin(), bins.end(), cd{});
    for (int k = 1; k <= P::kOfdmActive / 2; ++k) {
      for (int sign : {-1, 1}) {
        const auto bin = static_cast<std::size_t>((sign * k + P::kOfdmFft) % P::kOfdmFft);
        const double i = (rng.next() >> 63) ? amp : -amp;
        const double q = (rng.next() >> 63) ? amp : -amp;
        bins[bin] = {i, q};
      }
    }
    fft.inverse(bins);
    baseband.insert(baseband.end(), bins.end() - static_cast<std::ptrdiff_t>(kCp), bins.end());
    baseband.insert(baseband.end(), bins.begin(), bins.end());
  }
  return resampler.process(baseband, n);
}

}  // namespace

double symbol_rate(SignalClass cls, double bw) {
  switch (cls) {
    case SignalClass::QAM:
    case SignalClass::DSSS: return bw / (1.0 + P::kRrcRolloff);
    // Message pulses put the half-power edge of the sidebands at +/- bw/2.
    case SignalClass::AM: return bw;
    case SignalClass::BLE: return bw;
    case SignalClass::FM: return bw * P::kFmMessageFraction;
    case SignalClass::WIFI: return bw;
  }
  throw std::invalid_argument("symbol_rate: unknown class");
}

IqBuffer synthesize_baseband(const SignalSpec& spec, Rng& rng) {
  validate(spec);
  const std::size_t n = sample_count(spec.duration_s);
  if (n == 0) throw std::invalid_argument("degenerate duration: shorter than one sample");
  const double symbols = spec.duration_s * symbol_rate(spec.cls, spec.bandwidth_hz);
  if (symbols < min_symbols(spec.cls)) {
    throw std::invalid_argument("degenerate bandwidth: " + std::string(to_string(spec.cls)) +
                                " needs at least " + std::to_string(static_cast<int>(min_symbols(spec.cls))) +
                                " symbols in the signal duration");
  }

  IqBuffer out;
  out.sample_rate_hz = kCaptureRateHz;
  switch (spec.cls) {
    case SignalClass::QAM: out.samples = qam16(spec, n, rng); break;
    case SignalClass::DSSS: out.samples = dsss(spec, n, rng); break;
    case SignalClass::BLE: out.samples = gfsk(spec, n, rng); break;
    case SignalClass::AM: out.samples = am(spec, n, rng); break;
    case SignalClass::FM: out.samples = fm(spec, n, rng); break;
    case SignalClass::WIFI: out.samples = ofdm(spec, n, rng); break;
  }

  const double power = out.mean_power();
  if (!(power > 0.0) || !std::isfinite(power)) throw std::runtime_error("synthesize_baseband: zero-power waveform");
  const double g = 1.0 / std::sqrt(power);
  for (cd& x : out.samples) x *= g;
  return out;
}

IqBuffer scale_to_snr(IqBuffer signal, const SignalSpec& spec, const NoiseModel& noise) {
  const double target = std::pow(10.0, spec.snr_db / 10.0) * noise.psd * spec.bandwidth_hz;
  const double g = std::sqrt(target);
  for (cd& x : signal.samples) x *= g;
  return signal;
}

IqBuffer place_in_capture(IqBuffer capture, const IqBuffer& signal, const SignalSpec& spec) {
  validate(spec);
  if (capture.sample_rate_hz != signal.sample_rate_hz) {
    throw std::invalid_argument("place_in_capture: sample rate mismatch");
  }
  const std::size_t start = sample_count(spec.arrival_s, capture.sample_rate_hz);
  if (start + signal.size() > capture.size()) {
    throw std::out_of_range("place_in_capture: signal extends past the end of the capture");
  }
  // The carrier is resynchronized from the absolute sample index every
  // block so the recursive rotation never accumulates error.
  constexpr std::size_t kBlock = 4096;
  const double cycles_per_sample = spec.center_freq_hz / capture.sample_rate_hz;
  const cd step = std::polar(1.0, 2.0 * pi * cycles_per_sample);
  for (std::size_t b = 0; b < signal.size(); b += kBlock) {
    const std::size_t idx0 = start + b;
    double cycles = cycles_per_sample * static_cast<double>(idx0);
    cycles -= std::floor(cycles);
    cd rot = std::polar(1.0, 2.0 * pi * cycles);
    const std::size_t end = std::min(signal.size(), b + kBlock);
    for (std::size_t i = b; i < end; ++i) {
      capture.samples[start + i] += cmul(signal.samples[i], rot);
      rot = cmul(rot, step);
    }
  }
  return capture;
}

IqBuffer compose_scene(const SceneConfig& config, const NoiseModel& noise, Rng& rng) {
  if (!(noise.psd > 0.0)) throw std::invalid_argument("compose_scene: noise psd must be positive");
  IqBuffer capture;
  capture.sample_rate_hz = kCaptureRateHz;
  capture.samples.assign(kCaptureSamples, cd{});
  for (const SignalSpec& spec : config.specs) {
    Rng signal_rng(spec.stream_id);
    IqBuffer s = scale_to_snr(synthesize_baseband(spec, signal_rng), spec, noise);
    capture = place_in_capture(std::move(capture), s, spec);
  }
  const double variance = noise.total_power(capture.sample_rate_hz);
  for (cd& x : capture.samples) x += rng.complex_normal(variance);
  return capture;
}

namespace {

void put_f32(std::string& out, float v) {
  auto bits = std::bit_cast<std::uint32_t>(v);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFFU));
}

float get_f32(const unsigned char* p) {
  std::uint32_t bits = 0;
  for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return std::bit_cast<float>(bits);
}

}  // namespace

void write_iq(const IqBuffer& buffer, const std::filesystem::path& path) {
  std::string bytes;
  bytes.reserve(buffer.size() * 8);
  for (const cd& x : buffer.samples) {
    put_f32(bytes, static_cast<float>(x.real()));
    put_f32(bytes, static_cast<float>(x.imag()));
  }
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

IqBuffer read_iq(const std::filesystem::path& path, double sample_rate_hz) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  if (bytes.size() % 8 != 0) throw std::runtime_error(path.string() + ": size is not a multiple of 8 bytes");
  IqBuffer out;
  out.sample_rate_hz = sample_rate_hz;
  out.samples.resize(bytes.size() / 8);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  for (std::size_t i = 0; i < out.samples.size(); ++i) {
    out.samples[i] = {get_f32(p + 8 * i), get_f32(p + 8 * i + 4)};
  }
  return out;
}

}  // namespace emspec
