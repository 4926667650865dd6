#include <cmath>
#include <cstdint>
#include <set>

#include "doctest.h"
#include "emspec/energy_detector.hpp"
#include "emspec/random.hpp"
#include "emspec/spectrogram.hpp"
#include "emspec/synthesis.hpp"

using namespace emspec;

namespace {

void fill(Grid<double>& g, std::size_t r0, std::size_t c0, std::size_t r1, std::size_t c1, double v) {
  for (std::size_t r = r0; r < r1; ++r)
    for (std::size_t c = c0; c < c1; ++c) g(r, c) = v;
}

std::size_t count(const Grid<unsigned char>& m) {
  std::size_t n = 0;
  for (auto v : m.data()) n += v;
  return n;
}

}  // namespace

TEST_CASE("noise floor estimates") {
  const auto c = estimate_noise_floor(Grid<double>(8, 8, 0.3));
  CHECK(c.floor == 0.3);
  CHECK(c.spread == 0.0);

  Grid<double> half(8, 8, 0.0);
  fill(half, 0, 0, 4, 8, 1.0);
  const auto h = estimate_noise_floor(half);
  CHECK(h.floor == 0.0);
  CHECK(h.spread == 0.0);

  Rng r(5);
  Grid<double> g(512, 512);
  for (double& v : g.data()) v = 0.4 + 0.05 * r.normal();
  const auto n = estimate_noise_floor(g);
  CHECK(n.floor == doctest::Approx(0.4).epsilon(0.01));
  CHECK(std::abs(n.spread - 0.05) <= 0.05 * 0.05);
}

TEST_CASE("box filter") {
  Grid<double> g(5, 5, 0.0);
  g(2, 2) = 9.0;
  const auto s = box_filter(g, 1, 1);
  CHECK(s(2, 2) == doctest::Approx(1.0));
  CHECK(s(1, 1) == doctest::Approx(1.0));
  CHECK(s(0, 0) == 0.0);
  const auto k = box_filter(Grid<double>(4, 6, 2.5), 1, 4);
  for (double v : k.data()) CHECK(v == doctest::Approx(2.5));
}

TEST_CASE("component labelling connectivity") {
  Grid<unsigned char> m(3, 3, 0);
  m(0, 0) = 1;
  m(1, 1) = 1;
  const auto l8 = label_components(m, 8);
  CHECK(l8(0, 0) == l8(1, 1));
  const auto l4 = label_components(m, 4);
  CHECK(l4(0, 0) != l4(1, 1));
  CHECK(l4(0, 1) == 0);
}

TEST_CASE("one bright rectangle gives exactly its box") {
  Grid<double> g(128, 128, 0.0);
  fill(g, 40, 30, 70, 90, 1.0);
  const auto d = detect(g);
  REQUIRE(d.size() == 1);
  CHECK(d[0].class_id == 0);
  CHECK(d[0].box == BoundingBox{30, 40, 90, 70});
  CHECK(d[0].score == 1.0);
}

TEST_CASE("vertically adjacent rectangles in one band merge") {
  Grid<double> g(128, 128, 0.0);
  fill(g, 20, 40, 50, 60, 1.0);
  fill(g, 51, 40, 80, 60, 1.0);  // one-row gap, narrower than the filter
  const auto d = detect(g);
  REQUIRE(d.size() == 1);
  CHECK(d[0].box == BoundingBox{40, 20, 60, 80});
}

TEST_CASE("faint rectangle is missed") {
  Rng r(6);
  Grid<double> g(256, 256);
  for (double& v : g.data()) v = 0.3 + 0.02 * r.normal();
  for (std::size_t y = 100; y < 140; ++y)
    for (std::size_t x = 50; x < 120; ++x) g(y, x) += 0.02;
  CHECK(detect(g).empty());
}

TEST_CASE("detections are disjoint and shrink as k grows") {
  Rng r(7);
  Grid<double> g(256, 256);
  for (double& v : g.data()) v = 0.3 + 0.03 * r.normal();
  fill(g, 10, 10, 60, 40, 0.6);
  fill(g, 100, 100, 110, 250, 0.45);
  fill(g, 200, 20, 250, 30, 0.5);
  std::size_t prev = SIZE_MAX;
  for (double k : {1.0, 2.0, 3.0, 4.0, 6.0, 8.0}) {
    EnergyDetectorConfig cfg;
    cfg.k = k;
    const auto fg = foreground(g, cfg);
    CHECK(count(fg) <= prev);
    prev = count(fg);
  }
  EnergyDetectorConfig cfg;
  const auto fg = foreground(g, cfg);
  const auto dets = detect(g, cfg);
  CHECK(dets.size() == 3);
  const auto labels = label_components(fg, cfg.connectivity);
  std::set<int> seen;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels.data()[i]) seen.insert(labels.data()[i]);
  CHECK(seen.size() >= dets.size());
  for (const auto& d : dets) {
    CHECK(d.score >= 0.0);
    CHECK(d.score <= 1.0);
  }
}

TEST_CASE("config validation") {
  EnergyDetectorConfig cfg;
  cfg.k = 0.0;
  CHECK_THROWS(cfg.validate());
  cfg = {};
  cfg.connectivity = 6;
  CHECK_THROWS(cfg.validate());
  cfg = {};
  cfg.min_area = 0;
  CHECK_THROWS(cfg.validate());
}

TEST_CASE("noise-only scenes yield at most one false positive per image on average") {
  std::size_t total = 0;
  const int scenes = 50;
  for (int i = 0; i < scenes; ++i) {
    Rng rng(derive_stream(2024, {static_cast<std::uint64_t>(i)}));
    const IqBuffer cap = compose_scene(SceneConfig{}, NoiseModel{}, rng);
    SpectrogramImage img = render_spectrogram(cap);
    for (double& v : img.pixels.data()) v = std::floor(v * 255.0 + 0.5) / 255.0;
    total += detect(img.pixels).size();
  }
  MESSAGE("false positives over " << scenes << " noise scenes: " << total);
  CHECK(static_cast<double>(total) / scenes <= 1.0);
}
