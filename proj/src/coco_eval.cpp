#include "emspec/coco_eval.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <set>
#include <stdexcept>

namespace emspec {

namespace {

std::vector<double> linspace(double start, double stop, std::size_t num) {
  std::vector<double> v(num);
  const double step = (stop - start) / static_cast<double>(num - 1);
  for (std::size_t i = 0; i < num; ++i) v[i] = static_cast<double>(i) * step + start;
  v.back() = stop;
  return v;
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

std::vector<double> coco_iou_thresholds() { return linspace(0.5, 0.95, 10); }
std::vector<double> coco_recall_points() { return linspace(0.0, 1.0, 101); }

std::vector<std::size_t> sort_by_score(const std::vector<Detection>& dets) {
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });
  return order;
}

MatchResult match(const std::vector<Detection>& dets, const std::vector<Annotation>& gts,
                  const std::vector<double>& thresholds) {
  std::vector<std::vector<double>> ious(dets.size(), std::vector<double>(gts.size(), 0.0));
  for (std::size_t d = 0; d < dets.size(); ++d) {
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (dets[d].class_id == gts[g].class_id) ious[d][g] = iou(dets[d].box, gts[g].box);
    }
  }
  MatchResult m;
  for (double t : thresholds) {
    std::vector<bool> tp(dets.size(), false);
    std::vector<bool> taken(gts.size(), false);
    for (std::size_t d = 0; d < dets.size(); ++d) {
      double best = std::min(t, 1.0 - 1e-10);
      std::ptrdiff_t pick = -1;
      for (std::size_t g = 0; g < gts.size(); ++g) {
        if (taken[g] || gts[g].class_id != dets[d].class_id) continue;
        if (ious[d][g] < best) continue;
        best = ious[d][g];
        pick = static_cast<std::ptrdiff_t>(g);
      }
      if (pick >= 0) {
        taken[static_cast<std::size_t>(pick)] = true;
        tp[d] = true;
      }
    }
    m.det_tp.push_back(std::move(tp));
    m.gt_matched.push_back(std::move(taken));
  }
  return m;
}

double average_precision(const std::vector<ScoredHit>& hits, std::size_t gt_count) {
  if (gt_count == 0 || hits.empty()) return 0.0;
  const std::size_t n = hits.size();
  std::vector<std::size_t> tp_count(n);
  std::vector<double> precision(n);
  std::size_t tp = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (hits[i].tp) ++tp;
    tp_count[i] = tp;
    precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
  }
  for (std::size_t i = n - 1; i > 0; --i) precision[i - 1] = std::max(precision[i - 1], precision[i]);
  // Recall point j/100 is reached once tp / gt >= j / 100, compared in
  // integers so exact hits are not lost to rounding.
  double sum = 0.0;
  std::size_t k = 0;
  for (std::size_t j = 0; j <= 100; ++j) {
    while (k < n && tp_count[k] * 100 < j * gt_count) ++k;
    if (k == n) break;
    sum += precision[k];
  }
  return sum / 101.0;
}

EvalSummary evaluate(const GroundTruthSet& gt, const PredictionSet& predictions, const EvalOptions& opts) {
  for (const auto& [id, dets] : predictions) {
    if (!gt.count(id)) throw std::invalid_argument("prediction for unknown scene id '" + id + "'");
    for (const Detection& d : dets) {
      if (!(d.score >= 0.0 && d.score <= 1.0)) {
        throw std::invalid_argument("scene '" + id + "': detection score outside [0, 1]");
      }
    }
  }
  if (opts.max_dets == 0) throw std::invalid_argument("max_dets must be positive");

  EvalSummary s;
  s.thresholds = coco_iou_thresholds();
  const std::size_t T = s.thresholds.size();
  s.image_count = gt.size();

  std::set<int> classes;
  std::map<int, std::size_t> gt_per_class;
  // [class][threshold] hits, concatenated in image order.
  std::map<int, std::vector<std::vector<ScoredHit>>> hits;
  std::map<int, std::vector<double>> scores;
  static const std::vector<Detection> kNone;

  for (const auto& [id, gts_raw] : gt) {
    std::vector<Annotation> gts = gts_raw;
    const auto pit = predictions.find(id);
    std::vector<Detection> dets = pit == predictions.end() ? kNone : pit->second;
    if (opts.class_agnostic) {
      for (auto& g : gts) g.class_id = 0;
      for (auto& d : dets) d.class_id = 0;
    }
    s.gt_count += gts.size();
    s.det_count += dets.size();
    std::set<int> here;
    for (const auto& g : gts) here.insert(g.class_id);
    for (const auto& d : dets) here.insert(d.class_id);
    for (int c : here) {
      std::vector<Annotation> cg;
      for (const auto& g : gts) {
        if (g.class_id == c) cg.push_back(g);
      }
      std::vector<Detection> cd_all;
      for (const auto& d : dets) {
        if (d.class_id == c) cd_all.push_back(d);
      }
      std::vector<Detection> cd;
      for (std::size_t i : sort_by_score(cd_all)) {
        if (cd.size() == opts.max_dets) break;
        cd.push_back(cd_all[i]);
      }
      classes.insert(c);
      gt_per_class[c] += cg.size();
      auto& h = hits[c];
      h.resize(T);
      const MatchResult m = match(cd, cg, s.thresholds);
      for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t d = 0; d < cd.size(); ++d) h[t].push_back({cd[d].score, m.det_tp[t][d]});
      }
    }
  }

  std::vector<std::vector<double>> ap(T), ar(T);
  for (int c : classes) {
    const std::size_t npig = gt_per_class[c];
    if (npig == 0) continue;
    double ap_sum = 0.0, ar_sum = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      std::vector<ScoredHit> hs = hits[c][t];
      std::stable_sort(hs.begin(), hs.end(), [](const ScoredHit& a, const ScoredHit& b) { return a.score > b.score; });
      const double a = average_precision(hs, npig);
      const auto tp = static_cast<double>(std::count_if(hs.begin(), hs.end(), [](const ScoredHit& x) { return x.tp; }));
      const double r = tp / static_cast<double>(npig);
      ap[t].push_back(a);
      ar[t].push_back(r);
      ap_sum += a;
      ar_sum += r;
    }
    s.ap_per_class[c] = ap_sum / static_cast<double>(T);
    s.ar_per_class[c] = ar_sum / static_cast<double>(T);
  }
  for (std::size_t t = 0; t < T; ++t) {
    s.ap_per_threshold.push_back(mean(ap[t]));
    s.ar_per_threshold.push_back(mean(ar[t]));
  }
  s.map_50_95 = mean(s.ap_per_threshold);
  s.ar_100 = mean(s.ar_per_threshold);
  s.ap_50 = s.ap_per_threshold[0];
  s.ap_75 = s.ap_per_threshold[5];
  return s;
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::vector<std::pair<std::string, std::string>> rows(const EvalSummary& s) {
  std::vector<std::pair<std::string, std::string>> r{{"map_50_95", fmt(s.map_50_95)},
                                                     {"ap_50", fmt(s.ap_50)},
                                                     {"ap_75", fmt(s.ap_75)},
                                                     {"ar_100", fmt(s.ar_100)}};
  char key[32];
  for (std::size_t t = 0; t < s.thresholds.size(); ++t) {
    std::snprintf(key, sizeof key, "ap@%.2f", s.thresholds[t]);
    r.emplace_back(key, fmt(s.ap_per_threshold[t]));
  }
  for (std::size_t t = 0; t < s.thresholds.size(); ++t) {
    std::snprintf(key, sizeof key, "ar@%.2f", s.thresholds[t]);
    r.emplace_back(key, fmt(s.ar_per_threshold[t]));
  }
  for (const auto& [c, v] : s.ap_per_class) r.emplace_back("ap_class_" + std::to_string(c), fmt(v));
  for (const auto& [c, v] : s.ar_per_class) r.emplace_back("ar_class_" + std::to_string(c), fmt(v));
  r.emplace_back("images", std::to_string(s.image_count));
  r.emplace_back("gt_boxes", std::to_string(s.gt_count));
  r.emplace_back("detections", std::to_string(s.det_count));
  return r;
}

}  // namespace

std::string summary_text(const EvalSummary& s) {
  std::string out;
  for (const auto& [k, v] : rows(s)) out += k + " " + v + "\n";
  return out;
}

std::string summary_csv(const EvalSummary& s) {
  std::string out = "metric,value\n";
  for (const auto& [k, v] : rows(s)) out += k + "," + v + "\n";
  return out;
}

}  // namespace emspec
