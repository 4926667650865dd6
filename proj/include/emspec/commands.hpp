#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "emspec/anchors.hpp"
#include "emspec/coco_eval.hpp"
#include "emspec/dataset_io.hpp"
#include "emspec/energy_detector.hpp"
#include "emspec/scene.hpp"
#include "emspec/spectrogram.hpp"

namespace emspec {

/// Every knob of every command. Loaded from `key = value` text, overridden
/// by command-line flags.
struct RunConfig {
  std::uint64_t seed = 1;
  std::filesystem::path out = "dataset";
  unsigned jobs = 0;  // 0: hardware threads

  // generate
  int combos_per_k = 0;  // 0: all
  int k_min = 1;
  int k_max = 4;
  int configs = 20;
  int realizations = 5;
  int max_instances = 0;
  double test_fraction = 0.1765;
  MetadataRanges ranges = MetadataRanges::defaults();
  StftConfig stft;
  bool dump_iq = false;
  bool labels_only = false;

  // stats / anchors
  bool svg = false;
  std::string anchor_mode = "default-report";
  std::size_t anchor_k = 9;
  double anchor_iou = 0.5;
  double ratio_threshold = kRatioTestThreshold;

  // detect-baseline
  EnergyDetectorConfig detector;

  // evaluate
  std::filesystem::path predictions;  // empty: <out>/predictions
  std::filesystem::path ids;          // optional id list restricting evaluation
  std::string subset = "all";         // all | train | test
  bool class_agnostic = false;
  std::size_t max_dets = 100;

  /// Throws std::invalid_argument on an unknown key or bad value.
  void set(const std::string& key, const std::string& value);
  /// Applies a whole `key = value` file; `#` starts a comment.
  void load(const std::filesystem::path& path);
  void validate() const;
  /// Every key with its current value, loadable by load().
  std::string to_text() const;

  DatasetPlan plan() const;
  unsigned worker_count() const;
  std::filesystem::path predictions_dir() const;
};

/// Plans, synthesizes and writes the dataset under cfg.out. Returns the
/// scene ids in plan order.
std::vector<std::string> cmd_generate(const RunConfig& cfg, std::ostream& log);

/// Scene ids of the dataset at cfg.out restricted to cfg.subset / cfg.ids.
std::vector<std::string> selected_ids(const RunConfig& cfg);
GroundTruthSet load_ground_truth(const DatasetLayout& layout, const std::vector<std::string>& ids);
std::vector<BoundingBox> all_boxes(const GroundTruthSet& gt);

/// Writes stats/aspect_ratio_hist.csv and stats/side_length_hist.csv
/// (plus SVGs when cfg.svg) and prints a min/max/geomean summary.
BoxStats cmd_stats(const RunConfig& cfg, std::ostream& log);

struct AnchorReport {
  AnchorSet anchors;
  MatchReport match;
  double kmeans_bpr = 0.0;
};

/// default-report: the standard pyramid and its match rate.
/// kmeans: IoU k-means anchors and their best possible recall.
AnchorReport cmd_anchors(const RunConfig& cfg, std::ostream& log);

/// Runs the energy detector on every selected image and writes one
/// prediction file per image.
std::size_t cmd_detect_baseline(const RunConfig& cfg, std::ostream& log);

/// Scores the predictions directory against the selected labels and writes
/// eval/summary.csv and eval/summary.txt.
EvalSummary cmd_evaluate(const RunConfig& cfg, std::ostream& log);

}  // namespace emspec
