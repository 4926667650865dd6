#include "emspec/anchors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "emspec/random.hpp"

namespace emspec {

std::size_t Histogram::total() const { return std::accumulate(counts.begin(), counts.end(), std::size_t{0}); }

std::size_t Histogram::bin_of(double v) const {
  const std::size_t bins = counts.size();
  const auto it = std::upper_bound(edges.begin(), edges.end(), v);
  if (it == edges.begin()) return 0;
  const auto i = static_cast<std::size_t>(it - edges.begin()) - 1;
  return std::min(i, bins - 1);
}

void Histogram::add(double v) { ++counts[bin_of(v)]; }

Histogram Histogram::linear(double lo, double hi, std::size_t bins) {
  Histogram h;
  for (std::size_t i = 0; i <= bins; ++i) h.edges.push_back(lo + (hi - lo) * static_cast<double>(i) / bins);
  h.counts.assign(bins, 0);
  return h;
}

Histogram Histogram::log2_spaced(double lo, double hi, std::size_t bins) {
  Histogram h;
  const double a = std::log2(lo);
  const double b = std::log2(hi);
  for (std::size_t i = 0; i <= bins; ++i) h.edges.push_back(std::exp2(a + (b - a) * static_cast<double>(i) / bins));
  h.counts.assign(bins, 0);
  return h;
}

double BoxStats::min_ratio() const { return *std::min_element(aspect_ratios.begin(), aspect_ratios.end()); }
double BoxStats::max_ratio() const { return *std::max_element(aspect_ratios.begin(), aspect_ratios.end()); }

double BoxStats::geomean_ratio() const {
  double s = 0.0;
  for (double r : aspect_ratios) s += std::log(r);
  return std::exp(s / static_cast<double>(aspect_ratios.size()));
}

BoxStats box_stats(const std::vector<BoundingBox>& boxes) {
  if (boxes.empty()) throw std::invalid_argument("no annotations");
  BoxStats st;
  st.ratio_hist = Histogram::log2_spaced(1.0 / 64, 64.0, 64);
  st.width_hist = Histogram::linear(0.0, 512.0, 64);
  st.height_hist = st.width_hist;
  st.side_hist = st.width_hist;
  for (const BoundingBox& b : boxes) {
    if (!b.valid()) throw std::invalid_argument("box with non-positive size");
    const double w = b.width();
    const double h = b.height();
    st.widths.push_back(w);
    st.heights.push_back(h);
    st.aspect_ratios.push_back(w / h);
    st.ratio_hist.add(w / h);
    st.width_hist.add(w);
    st.height_hist.add(h);
    st.side_hist.add(w);
    st.side_hist.add(h);
  }
  return st;
}

namespace {

std::size_t cells(double stride, std::size_t image_size) {
  return static_cast<std::size_t>(std::floor(static_cast<double>(image_size) / stride));
}

BoundingBox centered(double cx, double cy, double w, double h) {
  return {cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2};
}

}  // namespace

std::size_t AnchorSet::placement_count(std::size_t image_size) const {
  std::size_t n = 0;
  for (const Anchor& a : anchors) {
    if (a.stride > 0.0) n += cells(a.stride, image_size) * cells(a.stride, image_size);
  }
  return n;
}

std::vector<BoundingBox> AnchorSet::placements(std::size_t image_size) const {
  std::vector<BoundingBox> out;
  out.reserve(placement_count(image_size));
  for (const Anchor& a : anchors) {
    if (a.stride <= 0.0) continue;
    const std::size_t n = cells(a.stride, image_size);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        out.push_back(centered((j + 0.5) * a.stride, (i + 0.5) * a.stride, a.width, a.height));
      }
    }
  }
  return out;
}

AnchorSet default_anchor_pyramid(const PyramidConfig& cfg) {
  if (cfg.strides.empty() || cfg.scales.empty() || cfg.ratios.empty()) {
    throw std::invalid_argument("anchor pyramid needs strides, scales and ratios");
  }
  if (cfg.sizes.size() != cfg.strides.size()) throw std::invalid_argument("one base size per stride required");
  AnchorSet set;
  set.source = AnchorSource::DefaultPyramid;
  for (std::size_t l = 0; l < cfg.strides.size(); ++l) {
    if (cfg.strides[l] <= 0.0 || cfg.sizes[l] <= 0.0) throw std::invalid_argument("non-positive stride or size");
    for (double scale : cfg.scales) {
      for (double r : cfg.ratios) {
        if (scale <= 0.0 || r <= 0.0) throw std::invalid_argument("non-positive scale or ratio");
        const double s = cfg.sizes[l] * scale;
        set.anchors.push_back({s * std::sqrt(r), s / std::sqrt(r), cfg.strides[l]});
      }
    }
  }
  return set;
}

double cocentered_iou(double w1, double h1, double w2, double h2) {
  const double inter = std::min(w1, w2) * std::min(h1, h2);
  return inter / (w1 * h1 + w2 * h2 - inter);
}

namespace {

double ratio_metric(double w, double h, const Anchor& a) {
  return std::max({w / a.width, a.width / w, h / a.height, a.height / h});
}

}  // namespace

double best_possible_recall(const std::vector<BoundingBox>& gt, const std::vector<Anchor>& anchors, double threshold) {
  if (gt.empty() || anchors.empty()) throw std::invalid_argument("best_possible_recall: empty input");
  std::size_t hit = 0;
  for (const BoundingBox& b : gt) {
    double best = std::numeric_limits<double>::infinity();
    for (const Anchor& a : anchors) best = std::min(best, ratio_metric(b.width(), b.height(), a));
    if (best <= threshold) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(gt.size());
}

MatchReport match_rate(const std::vector<BoundingBox>& gt, const AnchorSet& anchors, double iou_threshold,
                       std::size_t image_size, double ratio_threshold) {
  if (gt.empty() || anchors.anchors.empty()) throw std::invalid_argument("match_rate: empty input");
  MatchReport rep;
  rep.iou_threshold = iou_threshold;
  rep.max_iou.reserve(gt.size());
  std::size_t matched = 0;
  for (const BoundingBox& b : gt) {
    const double cx = (b.x_min + b.x_max) / 2;
    const double cy = (b.y_min + b.y_max) / 2;
    double best = 0.0;
    for (const Anchor& a : anchors.anchors) {
      double v;
      if (a.stride > 0.0) {
        // IoU between fixed-size boxes falls off with |dx| and |dy|
        // separately, so the nearest grid center on each axis is optimal.
        const auto n = static_cast<double>(cells(a.stride, image_size));
        const double j = std::clamp(std::floor(cx / a.stride), 0.0, n - 1);
        const double i = std::clamp(std::floor(cy / a.stride), 0.0, n - 1);
        v = iou(b, centered((j + 0.5) * a.stride, (i + 0.5) * a.stride, a.width, a.height));
      } else {
        v = cocentered_iou(b.width(), b.height(), a.width, a.height);
      }
      best = std::max(best, v);
    }
    rep.max_iou.push_back(best);
    if (best >= iou_threshold) ++matched;
  }
  rep.matched_fraction = static_cast<double>(matched) / static_cast<double>(gt.size());
  rep.best_possible_recall = best_possible_recall(gt, anchors.anchors, ratio_threshold);
  return rep;
}

namespace {

struct Wh {
  double w;
  double h;
};

double distance(const Wh& a, const Wh& b) { return 1.0 - cocentered_iou(a.w, a.h, b.w, b.h); }

std::size_t nearest(const Wh& p, const std::vector<Wh>& centroids) {
  std::size_t best = 0;
  double best_d = distance(p, centroids[0]);
  for (std::size_t c = 1; c < centroids.size(); ++c) {
    const double d = distance(p, centroids[c]);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

std::vector<Wh> seed_plus_plus(const std::vector<Wh>& pts, std::size_t k, Rng& rng) {
  std::vector<Wh> centroids{pts[rng.below(pts.size())]};
  std::vector<double> d2(pts.size());
  while (centroids.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      double d = distance(pts[i], centroids[0]);
      for (std::size_t c = 1; c < centroids.size(); ++c) d = std::min(d, distance(pts[i], centroids[c]));
      d2[i] = d * d;
      total += d2[i];
    }
    if (total <= 0.0) {
      centroids.push_back(pts[rng.below(pts.size())]);
      continue;
    }
    const double u = rng.uniform() * total;
    double acc = 0.0;
    std::size_t pick = pts.size() - 1;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      acc += d2[i];
      if (u < acc) {
        pick = i;
        break;
      }
    }
    centroids.push_back(pts[pick]);
  }
  return centroids;
}

}  // namespace

KMeansResult kmeans_anchors(const std::vector<BoundingBox>& boxes, std::size_t k, std::uint64_t seed,
                            int max_iterations, double ratio_threshold) {
  if (k == 0) throw std::invalid_argument("k must be positive");
  if (boxes.size() < k) {
    throw std::invalid_argument("kmeans: " + std::to_string(boxes.size()) + " boxes is fewer than k = " +
                                std::to_string(k));
  }
  std::vector<Wh> pts;
  pts.reserve(boxes.size());
  for (const BoundingBox& b : boxes) {
    if (!b.valid()) throw std::invalid_argument("kmeans: box with non-positive size");
    pts.push_back({b.width(), b.height()});
  }

  Rng rng(seed);
  std::vector<Wh> centroids = seed_plus_plus(pts, k, rng);
  std::vector<std::size_t> assign(pts.size(), k);
  KMeansResult res;

  for (int it = 0; it < max_iterations; ++it) {
    bool changed = false;
    double obj = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const std::size_t c = nearest(pts[i], centroids);
      if (c != assign[i]) changed = true;
      assign[i] = c;
      obj += distance(pts[i], centroids[c]);
    }
    res.objective.push_back(obj / static_cast<double>(pts.size()));

    bool moved = false;
    for (std::size_t c = 0; c < k; ++c) {
      double sw = 0.0, sh = 0.0, cur = 0.0;
      std::size_t n = 0;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        if (assign[i] != c) continue;
        sw += pts[i].w;
        sh += pts[i].h;
        cur += distance(pts[i], centroids[c]);
        ++n;
      }
      if (n == 0) continue;
      const Wh cand{sw / n, sh / n};
      double next = 0.0;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        if (assign[i] == c) next += distance(pts[i], cand);
      }
      if (next < cur) {
        centroids[c] = cand;
        moved = true;
      }
    }
    if (!changed && !moved) break;
  }

  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return centroids[a].w * centroids[a].h < centroids[b].w * centroids[b].h;
  });
  std::vector<std::size_t> rank(k);
  res.anchors.source = AnchorSource::KMeans;
  for (std::size_t r = 0; r < k; ++r) {
    rank[order[r]] = r;
    res.anchors.anchors.push_back({centroids[order[r]].w, centroids[order[r]].h, 0.0});
  }
  res.assignment.resize(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) res.assignment[i] = rank[assign[i]];
  res.best_possible_recall = best_possible_recall(boxes, res.anchors.anchors, ratio_threshold);
  return res;
}

std::string histogram_csv(const Histogram& h) {
  std::string out = "bin_lo,bin_hi,count\n";
  char buf[96];
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.9g,%.9g,%zu\n", h.edges[i], h.edges[i + 1], h.counts[i]);
    out += buf;
  }
  return out;
}

std::string histogram_svg(const Histogram& h, const std::string& title, bool log_x) {
  constexpr double width = 640, height = 360, margin = 40;
  const std::size_t peak = std::max<std::size_t>(1, *std::max_element(h.counts.begin(), h.counts.end()));
  auto xpos = [&](double v) {
    const double lo = log_x ? std::log2(h.edges.front()) : h.edges.front();
    const double hi = log_x ? std::log2(h.edges.back()) : h.edges.back();
    const double t = ((log_x ? std::log2(v) : v) - lo) / (hi - lo);
    return margin + t * (width - 2 * margin);
  };
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
  os << "<text x=\"" << margin << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";
  os << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\"" << width - margin << "\" y2=\""
     << height - margin << "\" stroke=\"black\"/>\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    if (h.counts[i] == 0) continue;
    const double x0 = xpos(h.edges[i]);
    const double x1 = xpos(h.edges[i + 1]);
    const double bh = (height - 2 * margin - 20) * static_cast<double>(h.counts[i]) / static_cast<double>(peak);
    os << "<rect x=\"" << x0 << "\" y=\"" << height - margin - bh << "\" width=\"" << std::max(1.0, x1 - x0 - 1)
       << "\" height=\"" << bh << "\" fill=\"steelblue\"/>\n";
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", h.edges.front());
  os << "<text x=\"" << margin << "\" y=\"" << height - margin + 16 << "\" font-size=\"11\">" << buf << "</text>\n";
  std::snprintf(buf, sizeof buf, "%.4g", h.edges.back());
  os << "<text x=\"" << width - margin - 24 << "\" y=\"" << height - margin + 16 << "\" font-size=\"11\">" << buf
     << "</text>\n";
  os << "</svg>\n";
  return os.str();
}

std::string anchors_text(const AnchorSet& set) {
  std::string out;
  char buf[64];
  for (const Anchor& a : set.anchors) {
    std::snprintf(buf, sizeof buf, "%.6f %.6f\n", a.width, a.height);
    out += buf;
  }
  return out;
}

std::vector<Anchor> parse_anchors_text(const std::string& text) {
  std::vector<Anchor> out;
  std::istringstream is(text);
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    Anchor a;
    if (!(ls >> a.width >> a.height) || a.width <= 0.0 || a.height <= 0.0) {
      throw std::runtime_error("anchor line " + std::to_string(line_no) + ": expected positive `w h`");
    }
    out.push_back(a);
  }
  return out;
}

}  // namespace emspec
