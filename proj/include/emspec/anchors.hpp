#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "emspec/geometry.hpp"

namespace emspec {

struct Histogram {
  /// bins + 1 edges.
  std::vector<double> edges;
  std::vector<std::size_t> counts;

  std::size_t total() const;
  /// Index of the bin holding v; out-of-range values go to the end bins.
  std::size_t bin_of(double v) const;
  void add(double v);

  static Histogram linear(double lo, double hi, std::size_t bins);
  static Histogram log2_spaced(double lo, double hi, std::size_t bins);
};

struct BoxStats {
  std::vector<double> aspect_ratios;  // w / h
  std::vector<double> widths;
  std::vector<double> heights;
  Histogram ratio_hist;
  Histogram width_hist;
  Histogram height_hist;
  /// Widths and heights pooled, two entries per box.
  Histogram side_hist;

  double min_ratio() const;
  double max_ratio() const;
  double geomean_ratio() const;
};

/// Ratios binned over 64 log-spaced bins on [2^-6, 2^6], sides over 64
/// linear bins on [0, 512].
BoxStats box_stats(const std::vector<BoundingBox>& boxes);

struct Anchor {
  double width = 0.0;
  double height = 0.0;
  /// Grid stride in pixels; 0 for free anchors compared co-centered.
  double stride = 0.0;

  bool operator==(const Anchor&) const = default;
};

enum class AnchorSource { DefaultPyramid, KMeans };

struct AnchorSet {
  std::vector<Anchor> anchors;
  AnchorSource source = AnchorSource::DefaultPyramid;

  /// Every grid placement over an image_size square image.
  std::vector<BoundingBox> placements(std::size_t image_size = 512) const;
  std::size_t placement_count(std::size_t image_size = 512) const;
};

struct PyramidConfig {
  std::vector<double> strides{8, 16, 32, 64, 128};
  /// One base size per stride.
  std::vector<double> sizes{32, 64, 128, 256, 512};
  std::vector<double> scales{1.0, 1.2599210498948732, 1.5874010519681994};
  std::vector<double> ratios{0.5, 1.0, 2.0};
};

/// Anchor (w, h) = size * scale * (sqrt r, 1 / sqrt r) at each level.
AnchorSet default_anchor_pyramid(const PyramidConfig& cfg = {});

struct MatchReport {
  double iou_threshold = 0.5;
  double matched_fraction = 0.0;
  std::vector<double> max_iou;
  /// Fraction of boxes whose best anchor shape passes the ratio test.
  double best_possible_recall = 0.0;
};

inline constexpr double kRatioTestThreshold = 4.0;

/// Per-box best IoU over all anchors. Grid anchors are placed at every
/// (i + 0.5) * stride center; free anchors are co-centered with the box.
MatchReport match_rate(const std::vector<BoundingBox>& gt, const AnchorSet& anchors, double iou_threshold = 0.5,
                       std::size_t image_size = 512, double ratio_threshold = kRatioTestThreshold);

/// IoU of two boxes sharing a center.
double cocentered_iou(double w1, double h1, double w2, double h2);

/// Best-anchor fraction under max(w/wa, wa/w, h/ha, ha/h) <= threshold.
double best_possible_recall(const std::vector<BoundingBox>& gt, const std::vector<Anchor>& anchors,
                            double threshold = kRatioTestThreshold);

struct KMeansResult {
  AnchorSet anchors;
  /// Mean 1 - IoU to the assigned centroid, one entry per iteration.
  std::vector<double> objective;
  std::vector<std::size_t> assignment;
  double best_possible_recall = 0.0;
};

/// k-means over box (w, h) with distance 1 - co-centered IoU and k-means++
/// seeding. A centroid moves to its cluster mean only when that lowers the
/// cluster's summed distance. Anchors are returned sorted by area.
KMeansResult kmeans_anchors(const std::vector<BoundingBox>& boxes, std::size_t k = 9, std::uint64_t seed = 1,
                            int max_iterations = 300, double ratio_threshold = kRatioTestThreshold);

std::string histogram_csv(const Histogram& h);
/// Plain bar chart, log-x when log_x is set.
std::string histogram_svg(const Histogram& h, const std::string& title, bool log_x);
/// One `w h` line per anchor.
std::string anchors_text(const AnchorSet& set);
std::vector<Anchor> parse_anchors_text(const std::string& text);

}  // namespace emspec
