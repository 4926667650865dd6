#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "emspec/random.hpp"
#include "emspec/signal.hpp"

namespace emspec {

using Combo = std::vector<SignalClass>;

struct Range {
  double lo = 0.0;
  double hi = 0.0;
  bool operator==(const Range&) const = default;
};

/// Uniform metadata ranges for signal draws.
struct MetadataRanges {
  /// Indexed by class id.
  std::array<Range, 6> bandwidth_hz{};
  Range snr_db{-5.0, 30.0};
  Range center_freq_hz{-kBandEdgeHz, kBandEdgeHz};
  double arrival_max_s = 0.04;
  double duration_min_s = 0.0005;

  static MetadataRanges defaults();
  void validate() const;

  bool operator==(const MetadataRanges&) const = default;
};

struct SceneConfig {
  Combo combo;
  std::vector<SignalSpec> specs;
  int combo_index = 0;
  int config_index = 0;
  int realization_index = 0;
  /// Drives the scene's noise.
  std::uint64_t stream_id = 0;

  /// `{combo:02}_{config:02}_{realization:02}`
  std::string scene_id() const;
};

struct DatasetPlan {
  std::uint64_t master_seed = 0;
  std::vector<Combo> combos;
  /// Position of each combo in the full enumeration; names and seeds
  /// follow it so a filtered plan reproduces the matching full-plan scenes.
  std::vector<int> combo_indices;
  int configs_per_combo = 20;
  int realizations_per_config = 5;
  /// Upper bound on signal instances per scene; 0 means one per class.
  int max_instances = 0;
  MetadataRanges ranges = MetadataRanges::defaults();

  /// All 56 combinations of one to four classes, full metadata protocol.
  static DatasetPlan defaults(std::uint64_t master_seed);

  std::size_t scene_count() const {
    return combos.size() * static_cast<std::size_t>(configs_per_combo) *
           static_cast<std::size_t>(realizations_per_config);
  }
};

struct SplitManifest {
  std::vector<std::string> train;
  std::vector<std::string> test;
  std::uint64_t seed = 0;
};

/// Combinations in lexicographic order of class index, grouped by size.
std::vector<Combo> enumerate_combinations(std::span<const SignalClass> classes, int min_k = 1, int max_k = 4);

/// Draws center frequency, bandwidth and SNR per signal; times stay unset.
SceneConfig sample_config(const Combo& combo, const MetadataRanges& ranges, Rng& rng, int max_instances = 0);

/// Draws arrival and duration per signal and a fresh content stream.
SceneConfig realize(const SceneConfig& config, const MetadataRanges& ranges, Rng& rng);

std::vector<SceneConfig> plan_dataset(const DatasetPlan& plan);

SplitManifest split_train_test(std::span<const std::string> scene_ids, double test_fraction, std::uint64_t seed);

}  // namespace emspec
