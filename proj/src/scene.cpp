#include "emspec/scene.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace emspec {

MetadataRanges MetadataRanges::defaults() {
  MetadataRanges r;
  r.bandwidth_hz.fill({1e6, 20e6});
  r.bandwidth_hz[class_id(SignalClass::BLE)] = {1e6, 2e6};
  r.bandwidth_hz[class_id(SignalClass::WIFI)] = {10e6, 20e6};
  return r;
}

void MetadataRanges::validate() const {
  auto check = [](const Range& r, const char* what) {
    if (!std::isfinite(r.lo) || !std::isfinite(r.hi) || r.lo > r.hi) {
      throw std::invalid_argument(std::string("metadata range ") + what + ": lo must not exceed hi");
    }
  };
  for (SignalClass c : kAllClasses) {
    const Range& bw = bandwidth_hz[class_id(c)];
    check(bw, "bandwidth");
    if (!(bw.lo > 0.0)) throw std::invalid_argument("metadata range bandwidth: must be positive");
    if (bw.hi > kCaptureRateHz) throw std::invalid_argument("metadata range bandwidth: exceeds 100 MHz");
  }
  check(snr_db, "snr");
  check(center_freq_hz, "center frequency");
  if (!(arrival_max_s >= 0.0) || !(duration_min_s > 0.0) || arrival_max_s + duration_min_s > kCaptureDurationS) {
    throw std::invalid_argument("metadata range timing: arrival_max + duration_min must fit in 50 ms");
  }
}

std::string SceneConfig::scene_id() const {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%02d_%02d_%02d", combo_index, config_index, realization_index);
  return buf;
}

DatasetPlan DatasetPlan::defaults(std::uint64_t master_seed) {
  DatasetPlan plan;
  plan.master_seed = master_seed;
  plan.combos = enumerate_combinations(kAllClasses, 1, 4);
  for (std::size_t i = 0; i < plan.combos.size(); ++i) plan.combo_indices.push_back(static_cast<int>(i));
  return plan;
}

std::vector<Combo> enumerate_combinations(std::span<const SignalClass> classes, int min_k, int max_k) {
  const int n = static_cast<int>(classes.size());
  if (n == 0) throw std::invalid_argument("enumerate_combinations: empty class set");
  if (min_k < 1 || min_k > max_k || max_k > n) {
    throw std::invalid_argument("enumerate_combinations: need 1 <= min_k <= max_k <= class count");
  }
  std::vector<Combo> out;
  for (int k = min_k; k <= max_k; ++k) {
    std::vector<int> idx(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
    while (true) {
      Combo combo;
      for (int i : idx) combo.push_back(classes[static_cast<std::size_t>(i)]);
      out.push_back(std::move(combo));
      int pos = k - 1;
      while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == n - k + pos) --pos;
      if (pos < 0) break;
      ++idx[static_cast<std::size_t>(pos)];
      for (int i = pos + 1; i < k; ++i) idx[static_cast<std::size_t>(i)] = idx[static_cast<std::size_t>(i - 1)] + 1;
    }
  }
  return out;
}

SceneConfig sample_config(const Combo& combo, const MetadataRanges& ranges, Rng& rng, int max_instances) {
  ranges.validate();
  if (combo.empty() || combo.size() > 4) throw std::invalid_argument("sample_config: combo must hold 1 to 4 classes");
  if (max_instances > 13) throw std::invalid_argument("sample_config: at most 13 signal instances");

  std::vector<SignalClass> classes(combo.begin(), combo.end());
  if (max_instances > static_cast<int>(combo.size())) {
    // Extra instances beyond one per class, drawn from the same combo.
    const auto extra = rng.below(static_cast<std::uint64_t>(max_instances) - combo.size() + 1);
    for (std::uint64_t i = 0; i < extra; ++i) classes.push_back(combo[rng.below(combo.size())]);
  }

  SceneConfig cfg;
  cfg.combo = combo;
  for (SignalClass c : classes) {
    SignalSpec s;
    s.cls = c;
    const Range bw = ranges.bandwidth_hz[class_id(c)];
    s.bandwidth_hz = rng.uniform(bw.lo, bw.hi);
    s.snr_db = rng.uniform(ranges.snr_db.lo, ranges.snr_db.hi);
    // Uniform fc conditioned on the band fitting inside +/-50 MHz; the same
    // distribution as redrawing until it fits, without the loop.
    const double lo = std::max(ranges.center_freq_hz.lo, -kBandEdgeHz + s.bandwidth_hz / 2);
    const double hi = std::min(ranges.center_freq_hz.hi, kBandEdgeHz - s.bandwidth_hz / 2);
    if (lo > hi) throw std::invalid_argument("sample_config: no center frequency fits the drawn bandwidth");
    s.center_freq_hz = rng.uniform(lo, hi);
    cfg.specs.push_back(s);
  }
  return cfg;
}

SceneConfig realize(const SceneConfig& config, const MetadataRanges& ranges, Rng& rng) {
  SceneConfig out = config;
  for (SignalSpec& s : out.specs) {
    s.arrival_s = rng.uniform(0.0, ranges.arrival_max_s);
    s.duration_s = rng.uniform(ranges.duration_min_s, kCaptureDurationS - s.arrival_s);
    s.stream_id = rng.next();
  }
  out.stream_id = rng.next();
  return out;
}

std::vector<SceneConfig> plan_dataset(const DatasetPlan& plan) {
  plan.ranges.validate();
  if (plan.configs_per_combo < 1 || plan.realizations_per_config < 1) {
    throw std::invalid_argument("plan_dataset: counts must be at least 1");
  }
  if (plan.combo_indices.size() != plan.combos.size()) {
    throw std::invalid_argument("plan_dataset: combo_indices must parallel combos");
  }
  std::vector<SceneConfig> scenes;
  scenes.reserve(plan.scene_count());
  for (std::size_t c = 0; c < plan.combos.size(); ++c) {
    const auto combo_index = static_cast<std::uint64_t>(plan.combo_indices[c]);
    for (int j = 0; j < plan.configs_per_combo; ++j) {
      Rng config_rng(derive_stream(plan.master_seed, {combo_index, static_cast<std::uint64_t>(j)}));
      SceneConfig base = sample_config(plan.combos[c], plan.ranges, config_rng, plan.max_instances);
      base.combo_index = static_cast<int>(combo_index);
      base.config_index = j;
      for (int r = 0; r < plan.realizations_per_config; ++r) {
        Rng real_rng(derive_stream(plan.master_seed,
                                   {combo_index, static_cast<std::uint64_t>(j), static_cast<std::uint64_t>(r)}));
        SceneConfig scene = realize(base, plan.ranges, real_rng);
        scene.realization_index = r;
        scenes.push_back(std::move(scene));
      }
    }
  }
  return scenes;
}

SplitManifest split_train_test(std::span<const std::string> scene_ids, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw std::invalid_argument("split_train_test: test fraction must be in (0, 1)");
  }
  const std::size_t n = scene_ids.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

  const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
  std::vector<bool> is_test(n, false);
  for (std::size_t i = 0; i < n_test; ++i) is_test[order[i]] = true;

  SplitManifest m;
  m.seed = seed;
  for (std::size_t i = 0; i < n; ++i) (is_test[i] ? m.test : m.train).push_back(scene_ids[i]);
  return m;
}

}  // namespace emspec
