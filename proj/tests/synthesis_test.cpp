#include <cmath>
#include <complex>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "doctest.h"
#include "emspec/fft.hpp"
#include "emspec/synthesis.hpp"
#include "oracles/psd.hpp"

using namespace emspec;

namespace {

SignalSpec spec_of(SignalClass c, double bw, double dur, double fc = 0.0, double snr = 10.0) {
  SignalSpec s;
  s.cls = c;
  s.bandwidth_hz = bw;
  s.duration_s = dur;
  s.center_freq_hz = fc;
  s.snr_db = snr;
  s.stream_id = 99;
  return s;
}

/// 99%-power width from an averaged periodogram, in Hz.
double bandwidth99(const std::vector<double>& psd, double bin_hz) {
  double total = 0.0;
  for (double p : psd) total += p;
  double acc = 0.0;
  std::size_t lo = 0, hi = psd.size() - 1;
  bool have_lo = false;
  for (std::size_t k = 0; k < psd.size(); ++k) {
    acc += psd[k];
    if (!have_lo && acc >= 0.005 * total) {
      lo = k;
      have_lo = true;
    }
    if (acc >= 0.995 * total) {
      hi = k;
      break;
    }
  }
  return static_cast<double>(hi - lo + 1) * bin_hz;
}

/// In-band SNR of a capture interval by averaged periodogram, using the
/// known noise floor psd.
double measured_snr_db(const IqBuffer& cap, std::size_t start, std::size_t len, double fc, double bw, double psd) {
  const std::size_t n = 4096;
  Fft f(n);
  std::vector<double> acc(n, 0.0);
  std::vector<std::complex<double>> buf(n);
  double wsum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = 0.5 - 0.5 * std::cos(2 * std::numbers::pi * i / n);
    wsum += w * w;
  }
  std::size_t segs = 0;
  for (std::size_t s = start; s + n <= start + len; s += n, ++segs) {
    for (std::size_t i = 0; i < n; ++i)
      buf[i] = cap.samples[s + i] * (0.5 - 0.5 * std::cos(2 * std::numbers::pi * i / n));
    f.forward(buf);
    for (std::size_t k = 0; k < n; ++k) acc[(k + n / 2) % n] += std::norm(buf[k]);
  }
  const double bin = kCaptureRateHz / n;
  double in_band = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double fk = (static_cast<double>(k) - n / 2.0) * bin;
    if (std::abs(fk - fc) <= bw / 2) in_band += acc[k];
  }
  // Power per bin = |X|^2 / (n * sum w^2).
  in_band /= static_cast<double>(segs) * static_cast<double>(n) * wsum;
  double width = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double fk = (static_cast<double>(k) - n / 2.0) * bin;
    if (std::abs(fk - fc) <= bw / 2) width += bin;
  }
  const double noise = psd * width;
  return 10.0 * std::log10((in_band - noise) / (psd * bw));
}

}  // namespace

TEST_CASE("baseband length and unit power") {
  Rng r(1);
  const IqBuffer x = synthesize_baseband(spec_of(SignalClass::AM, 10e6, 0.01), r);
  CHECK(x.size() == 1'000'000);
  CHECK(x.sample_rate_hz == kCaptureRateHz);
  CHECK(std::abs(x.mean_power() - 1.0) < 1e-6);
  for (const auto& z : x.samples) REQUIRE(std::isfinite(z.real()));
}

TEST_CASE("every class is deterministic and unit power") {
  for (SignalClass c : kAllClasses) {
    CAPTURE(to_string(c));
    const double bw = c == SignalClass::BLE ? 2e6 : 12e6;
    Rng a(5), b(5);
    const auto s = spec_of(c, bw, 0.002);
    const IqBuffer x = synthesize_baseband(s, a);
    const IqBuffer y = synthesize_baseband(s, b);
    CHECK(x == y);
    CHECK(std::abs(x.mean_power() - 1.0) < 1e-9);
  }
}

TEST_CASE("occupied bandwidth and containment per class") {
  struct Case {
    SignalClass c;
    double bw;
  };
  const std::vector<Case> cases{{SignalClass::QAM, 10e6}, {SignalClass::QAM, 2e6},  {SignalClass::DSSS, 15e6},
                                {SignalClass::BLE, 2e6},  {SignalClass::BLE, 1e6},  {SignalClass::AM, 8e6},
                                {SignalClass::FM, 12e6},  {SignalClass::WIFI, 20e6}, {SignalClass::WIFI, 10e6}};
  for (const auto& tc : cases) {
    CAPTURE(to_string(tc.c));
    CAPTURE(tc.bw);
    Rng r(7);
    const IqBuffer x = synthesize_baseband(spec_of(tc.c, tc.bw, 0.004), r);
    const std::size_t n = 1024;
    const auto psd = oracle::welch_psd(x.samples, n, 24);
    const double bin = kCaptureRateHz / n;
    const double b99 = bandwidth99(psd, bin);
    CHECK(b99 >= 0.75 * tc.bw);
    CHECK(b99 <= 1.25 * tc.bw);
    const double lo = n / 2.0 - 0.75 * tc.bw / bin;
    const double hi = n / 2.0 + 0.75 * tc.bw / bin;
    CHECK(oracle::occupied_fraction_of_band(psd, lo, hi) >= 0.95);
  }
}

TEST_CASE("degenerate bandwidth is rejected") {
  Rng r(1);
  try {
    synthesize_baseband(spec_of(SignalClass::DSSS, 1e6, 2e-5), r);
    FAIL("expected rejection");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("degenerate bandwidth") != std::string::npos);
  }
}

TEST_CASE("invalid specs are rejected") {
  Rng r(1);
  auto s = spec_of(SignalClass::QAM, 10e6, 0.02);
  s.arrival_s = 0.04;
  CHECK_THROWS_AS(synthesize_baseband(s, r), std::invalid_argument);
  s = spec_of(SignalClass::QAM, 10e6, 0.01, 48e6);
  CHECK_THROWS_AS(synthesize_baseband(s, r), std::invalid_argument);
  s = spec_of(SignalClass::QAM, -1.0, 0.01);
  CHECK_THROWS_AS(synthesize_baseband(s, r), std::invalid_argument);
}

TEST_CASE("snr scaling") {
  IqBuffer unit;
  unit.samples.assign(1000, std::complex<double>(1.0, 0.0));
  NoiseModel nm;
  nm.psd = 1e-7;
  auto s = spec_of(SignalClass::QAM, 1e7, 0.001, 0.0, 0.0);
  CHECK(scale_to_snr(unit, s, nm).mean_power() == doctest::Approx(1.0).epsilon(1e-12));
  s.snr_db = 10.0;
  CHECK(std::abs(scale_to_snr(unit, s, nm).mean_power() - 10.0) < 1e-6);
  nm.psd = 1e-8;
  s.snr_db = -3.0;
  CHECK(scale_to_snr(unit, s, nm).mean_power() == doctest::Approx(std::pow(10.0, -0.3) * 0.1).epsilon(1e-12));
}

TEST_CASE("placement: identity, shift, linearity, bounds") {
  IqBuffer cap;
  cap.samples.assign(200'000, 0.0);
  Rng r(2);
  for (auto& z : cap.samples) z = r.complex_normal(1.0);
  IqBuffer sig;
  sig.samples.resize(50'000);
  for (auto& z : sig.samples) z = r.complex_normal(1.0);

  auto s = spec_of(SignalClass::QAM, 1e6, 50'000 / kCaptureRateHz);
  const IqBuffer plain = place_in_capture(cap, sig, s);
  for (std::size_t i = 0; i < 50'000; ++i) REQUIRE(plain.samples[i] == cap.samples[i] + sig.samples[i]);
  for (std::size_t i = 50'000; i < cap.size(); ++i) REQUIRE(plain.samples[i] == cap.samples[i]);

  s.center_freq_hz = 17.3e6;
  s.arrival_s = 1e-3;
  const IqBuffer shifted = place_in_capture(cap, sig, s);
  IqBuffer neg = sig;
  for (auto& z : neg.samples) z = -z;
  const IqBuffer back = place_in_capture(shifted, neg, s);
  double err = 0.0;
  for (std::size_t i = 0; i < cap.size(); ++i) err = std::max(err, std::abs(back.samples[i] - cap.samples[i]));
  CHECK(err < 1e-9);
  for (std::size_t i = 0; i < 100'000; ++i) REQUIRE(shifted.samples[i] == cap.samples[i]);
  for (std::size_t i = 150'000; i < cap.size(); ++i) REQUIRE(shifted.samples[i] == cap.samples[i]);

  s.arrival_s = 1.9e-3;
  CHECK_THROWS_AS(place_in_capture(cap, sig, s), std::out_of_range);
  s.arrival_s = 0.049;
  s.duration_s = 0.002;
  CHECK_THROWS_AS(place_in_capture(cap, sig, s), std::invalid_argument);
}

TEST_CASE("a DC tone placed at 25 MHz peaks at the 25 MHz bin") {
  IqBuffer cap;
  cap.samples.assign(8192, 0.0);
  IqBuffer dc;
  dc.samples.assign(8192, 1.0);
  auto s = spec_of(SignalClass::QAM, 1e6, 8192 / kCaptureRateHz, 25e6);
  IqBuffer out = place_in_capture(cap, dc, s);
  Fft f(8192);
  f.forward(out.samples);
  std::size_t best = 0;
  for (std::size_t k = 0; k < 8192; ++k)
    if (std::abs(out.samples[k]) > std::abs(out.samples[best])) best = k;
  CHECK(best == 2048);  // 25e6 / 1e8 * 8192
}

TEST_CASE("composed noise power, determinism and linearity") {
  SceneConfig empty;
  Rng r1(11);
  const IqBuffer noise = compose_scene(empty, NoiseModel{}, r1);
  CHECK(noise.size() == kCaptureSamples);
  CHECK(noise.mean_power() == doctest::Approx(1.0).epsilon(0.01));

  SceneConfig a, b, ab;
  auto sa = spec_of(SignalClass::QAM, 8e6, 0.01, -20e6, 15.0);
  sa.arrival_s = 0.005;
  sa.stream_id = 1234;
  auto sb = spec_of(SignalClass::FM, 5e6, 0.02, 12e6, 5.0);
  sb.arrival_s = 0.01;
  sb.stream_id = 5678;
  a.specs = {sa};
  b.specs = {sb};
  ab.specs = {sa, sb};
  Rng ra(11), rb(11), rab(11), rab2(11);
  const IqBuffer ca = compose_scene(a, NoiseModel{}, ra);
  const IqBuffer cb = compose_scene(b, NoiseModel{}, rb);
  const IqBuffer cab = compose_scene(ab, NoiseModel{}, rab);
  CHECK(cab == compose_scene(ab, NoiseModel{}, rab2));
  double err = 0.0;
  for (std::size_t i = 0; i < kCaptureSamples; ++i)
    err = std::max(err, std::abs(cab.samples[i] - (ca.samples[i] + cb.samples[i] - noise.samples[i])));
  CHECK(err < 1e-9);
}

TEST_CASE("in-band SNR calibration") {
  for (double snr : {0.0, 10.0, 20.0}) {
    CAPTURE(snr);
    SceneConfig sc;
    auto s = spec_of(SignalClass::QAM, 10e6, 0.02, 15e6, snr);
    s.stream_id = 77;
    sc.specs = {s};
    Rng r(3);
    const IqBuffer cap = compose_scene(sc, NoiseModel{}, r);
    const double m = measured_snr_db(cap, 0, 2'000'000, 15e6, 10e6, NoiseModel{}.psd);
    CHECK(std::abs(m - snr) <= 1.0);
  }
}

TEST_CASE("iq dump round trip at float precision") {
  IqBuffer x;
  Rng r(8);
  x.samples.resize(1000);
  for (auto& z : x.samples) z = r.complex_normal(1.0);
  const auto p = std::filesystem::temp_directory_path() / "emspec_iq_roundtrip.iq";
  write_iq(x, p);
  CHECK(std::filesystem::file_size(p) == 8000);
  const IqBuffer y = read_iq(p);
  REQUIRE(y.size() == x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(y.samples[i].real() == static_cast<float>(x.samples[i].real()));
    CHECK(y.samples[i].imag() == static_cast<float>(x.samples[i].imag()));
  }
  std::filesystem::remove(p);
}
