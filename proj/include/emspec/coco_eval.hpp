#pragma once

#include <map>
#include <string>
#include <vector>

#include "emspec/geometry.hpp"

namespace emspec {

using GroundTruthSet = std::map<std::string, std::vector<Annotation>>;
using PredictionSet = std::map<std::string, std::vector<Detection>>;

/// 0.50, 0.55, ..., 0.95 (numpy linspace arithmetic).
std::vector<double> coco_iou_thresholds();
/// 0.00, 0.01, ..., 1.00.
std::vector<double> coco_recall_points();

/// Indices of dets ordered by descending score; ties keep input order.
std::vector<std::size_t> sort_by_score(const std::vector<Detection>& dets);

struct MatchResult {
  /// [threshold][detection], detections in the order given to match().
  std::vector<std::vector<bool>> det_tp;
  /// [threshold][gt]
  std::vector<std::vector<bool>> gt_matched;
};

/// Greedy one-to-one matching of score-sorted detections to ground truth of
/// the same class. A detection takes the unmatched GT with the highest IoU
/// at or above the threshold; on an exact IoU tie the later GT wins.
MatchResult match(const std::vector<Detection>& dets_sorted, const std::vector<Annotation>& gts,
                  const std::vector<double>& thresholds);

struct ScoredHit {
  double score = 0.0;
  bool tp = false;
};

/// 101-point interpolated AP from hits already in score order. Zero GT
/// yields 0.
double average_precision(const std::vector<ScoredHit>& hits, std::size_t gt_count);

struct EvalOptions {
  bool class_agnostic = false;
  std::size_t max_dets = 100;
};

struct EvalSummary {
  double map_50_95 = 0.0;
  double ap_50 = 0.0;
  double ap_75 = 0.0;
  double ar_100 = 0.0;
  std::vector<double> thresholds;
  std::vector<double> ap_per_threshold;
  std::vector<double> ar_per_threshold;
  /// Classes with at least one GT box.
  std::map<int, double> ap_per_class;
  std::map<int, double> ar_per_class;
  std::size_t image_count = 0;
  std::size_t gt_count = 0;
  std::size_t det_count = 0;
};

/// MSCOCO-style bbox evaluation over the images in `gt`. Every prediction
/// image id must exist in `gt`.
EvalSummary evaluate(const GroundTruthSet& gt, const PredictionSet& predictions, const EvalOptions& opts = {});

/// `key value` lines.
std::string summary_text(const EvalSummary& s);
/// `metric,value` rows.
std::string summary_csv(const EvalSummary& s);

}  // namespace emspec
