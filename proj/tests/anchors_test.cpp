#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "emspec/anchors.hpp"
#include "emspec/random.hpp"

using namespace emspec;

namespace {

BoundingBox wh(double cx, double cy, double w, double h) { return {cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2}; }

std::vector<BoundingBox> random_boxes(std::size_t n, std::uint64_t seed) {
  Rng r(seed);
  std::vector<BoundingBox> out;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = r.uniform(2, 200), h = r.uniform(2, 512);
    const double x0 = r.uniform(0, 512 - w), y0 = r.uniform(0, 512 - h);
    out.push_back({x0, y0, x0 + w, y0 + h});
  }
  return out;
}

double brute_max_iou(const BoundingBox& b, const std::vector<BoundingBox>& placed) {
  double best = 0.0;
  for (const auto& p : placed) best = std::max(best, iou(b, p));
  return best;
}

}  // namespace

TEST_CASE("box statistics") {
  const auto st = box_stats({BoundingBox{0, 100, 512, 116}});
  CHECK(st.aspect_ratios == std::vector<double>{32.0});
  CHECK(st.widths == std::vector<double>{512.0});
  CHECK(st.heights == std::vector<double>{16.0});
  CHECK(st.ratio_hist.total() == 1);
  const auto bin = st.ratio_hist.bin_of(32.0);
  CHECK(st.ratio_hist.counts[bin] == 1);
  CHECK(st.ratio_hist.edges[bin] <= 32.0);
  CHECK(st.ratio_hist.edges[bin + 1] > 32.0);

  const auto two = box_stats({BoundingBox{0, 0, 1, 2}, BoundingBox{0, 0, 2, 1}});
  CHECK(two.aspect_ratios == std::vector<double>{0.5, 2.0});
  CHECK(two.geomean_ratio() == doctest::Approx(1.0));

  CHECK_THROWS(box_stats({}));
}

TEST_CASE("histogram edges, clamping and permutation invariance") {
  auto boxes = random_boxes(300, 4);
  boxes.push_back({0, 0, 512, 1});   // ratio 512, above the last edge
  boxes.push_back({0, 0, 1, 512});   // ratio 1/512, below the first edge
  const auto st = box_stats(boxes);
  CHECK(st.ratio_hist.edges.size() == 65);
  CHECK(st.ratio_hist.edges.front() == doctest::Approx(1.0 / 64));
  CHECK(st.ratio_hist.edges.back() == doctest::Approx(64.0));
  CHECK(st.ratio_hist.edges[32] == doctest::Approx(1.0));
  CHECK(st.width_hist.edges[1] == 8.0);
  CHECK(st.ratio_hist.total() == boxes.size());
  CHECK(st.width_hist.total() == boxes.size());
  CHECK(st.side_hist.total() == 2 * boxes.size());
  CHECK(st.ratio_hist.counts.back() >= 1);
  CHECK(st.ratio_hist.counts.front() >= 1);

  auto shuffled = boxes;
  std::reverse(shuffled.begin(), shuffled.end());
  std::rotate(shuffled.begin(), shuffled.begin() + 17, shuffled.end());
  const auto st2 = box_stats(shuffled);
  CHECK(st2.ratio_hist.counts == st.ratio_hist.counts);
  CHECK(st2.side_hist.counts == st.side_hist.counts);
  CHECK(st2.min_ratio() == st.min_ratio());
  CHECK(st2.max_ratio() == st.max_ratio());

  const auto csv = histogram_csv(st.ratio_hist);
  CHECK(csv.rfind("bin_lo,bin_hi,count\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 65);
  CHECK(histogram_svg(st.side_hist, "sides", false).find("<svg") != std::string::npos);
}

TEST_CASE("default pyramid") {
  const auto set = default_anchor_pyramid();
  CHECK(set.anchors.size() == 45);
  CHECK(set.placement_count() == 49104);
  CHECK(set.placements().size() == 49104);
  const Anchor& a0 = set.anchors[1];  // size 32, scale 1, ratio 1
  CHECK(a0.width == doctest::Approx(32.0));
  CHECK(a0.height == doctest::Approx(32.0));
  const Anchor& a1 = set.anchors[0];  // ratio 0.5
  CHECK(a1.width == doctest::Approx(22.627).epsilon(1e-4));
  CHECK(a1.height == doctest::Approx(45.255).epsilon(1e-4));
  CHECK(a1.stride == 8.0);

  PyramidConfig one;
  one.strides = {16};
  one.sizes = {32};
  one.scales = {1.0};
  one.ratios = {1.0};
  CHECK(default_anchor_pyramid(one).placement_count() == 32 * 32);
  one.sizes = {};
  CHECK_THROWS(default_anchor_pyramid(one));
}

TEST_CASE("match rate examples") {
  const auto pyr = default_anchor_pyramid();
  const auto exact = match_rate({wh(8 * 10 + 4, 8 * 3 + 4, 32, 32)}, pyr);
  CHECK(exact.max_iou[0] == doctest::Approx(1.0));
  CHECK(exact.matched_fraction == 1.0);

  const auto strip = match_rate({BoundingBox{0, 200, 512, 204}}, pyr);
  CHECK(strip.max_iou[0] < 0.5);
  CHECK(strip.matched_fraction == 0.0);

  PyramidConfig one;
  one.strides = {32};
  one.sizes = {32};
  one.scales = {1.0};
  one.ratios = {1.0};
  const auto tiny = match_rate({wh(16, 16, 8, 8)}, default_anchor_pyramid(one));
  CHECK(tiny.max_iou[0] == doctest::Approx(64.0 / 1024.0));
}

TEST_CASE("nearest grid center equals the exhaustive scan") {
  const auto pyr = default_anchor_pyramid();
  const auto placed = pyr.placements();
  const auto boxes = random_boxes(40, 12);
  const auto rep = match_rate(boxes, pyr);
  for (std::size_t i = 0; i < boxes.size(); ++i) CHECK(rep.max_iou[i] == doctest::Approx(brute_max_iou(boxes[i], placed)).epsilon(1e-12));
}

TEST_CASE("match rate monotonicity") {
  const auto boxes = random_boxes(200, 13);
  const auto pyr = default_anchor_pyramid();
  double prev = 1.0;
  for (double t = 0.1; t <= 0.95; t += 0.05) {
    const double f = match_rate(boxes, pyr, t).matched_fraction;
    CHECK(f <= prev);
    prev = f;
  }
  PyramidConfig small;
  small.ratios = {1.0};
  const auto sub = match_rate(boxes, default_anchor_pyramid(small));
  const auto sup = match_rate(boxes, pyr);
  for (std::size_t i = 0; i < boxes.size(); ++i) CHECK(sup.max_iou[i] >= sub.max_iou[i]);
}

TEST_CASE("co-centered iou and ratio test") {
  CHECK(cocentered_iou(10, 10, 10, 10) == 1.0);
  CHECK(cocentered_iou(10, 10, 20, 5) == doctest::Approx(50.0 / 150.0));
  const std::vector<Anchor> a{{10, 10, 0}};
  CHECK(best_possible_recall({wh(50, 50, 40, 10)}, a) == 1.0);
  CHECK(best_possible_recall({wh(50, 50, 41, 10)}, a) == 0.0);
  CHECK(best_possible_recall({wh(50, 50, 10, 2.5)}, a) == 1.0);
}

TEST_CASE("kmeans degenerate and determinism") {
  std::vector<BoundingBox> same(30, wh(100, 100, 100, 10));
  const auto km = kmeans_anchors(same, 9, 1);
  REQUIRE(km.anchors.anchors.size() == 9);
  for (const auto& a : km.anchors.anchors) {
    CHECK(a.width == doctest::Approx(100.0));
    CHECK(a.height == doctest::Approx(10.0));
  }
  CHECK(km.best_possible_recall == 1.0);

  const auto boxes = random_boxes(400, 14);
  const auto x = kmeans_anchors(boxes, 9, 5);
  const auto y = kmeans_anchors(boxes, 9, 5);
  CHECK(x.anchors.anchors == y.anchors.anchors);
  CHECK(x.objective == y.objective);
  for (std::size_t i = 1; i < x.objective.size(); ++i) CHECK(x.objective[i] <= x.objective[i - 1]);
  for (std::size_t i = 1; i < 9; ++i)
    CHECK(x.anchors.anchors[i].width * x.anchors.anchors[i].height >=
          x.anchors.anchors[i - 1].width * x.anchors.anchors[i - 1].height);

  CHECK_THROWS(kmeans_anchors(random_boxes(5, 1), 9, 1));
}

TEST_CASE("two tight clusters agree with brute-force 2-means") {
  Rng r(21);
  std::vector<BoundingBox> boxes;
  for (int i = 0; i < 5; ++i) boxes.push_back(wh(100, 100, r.uniform(90, 110), r.uniform(8, 12)));
  for (int i = 0; i < 5; ++i) boxes.push_back(wh(100, 100, r.uniform(8, 12), r.uniform(180, 220)));

  // Brute force: every bipartition, centroids at the member means, keep the
  // partition with the lowest summed 1 - IoU.
  const std::size_t n = boxes.size();
  double best = 1e18;
  unsigned best_mask = 0;
  for (unsigned mask = 1; mask < (1u << n) - 1; ++mask) {
    double cost = 0.0;
    for (int side = 0; side < 2; ++side) {
      double sw = 0, sh = 0;
      int cnt = 0;
      for (std::size_t i = 0; i < n; ++i)
        if (((mask >> i) & 1u) == static_cast<unsigned>(side)) {
          sw += boxes[i].width();
          sh += boxes[i].height();
          ++cnt;
        }
      for (std::size_t i = 0; i < n; ++i)
        if (((mask >> i) & 1u) == static_cast<unsigned>(side))
          cost += 1.0 - cocentered_iou(boxes[i].width(), boxes[i].height(), sw / cnt, sh / cnt);
    }
    if (cost < best) {
      best = cost;
      best_mask = mask;
    }
  }
  const auto km = kmeans_anchors(boxes, 2, 3);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      CHECK((km.assignment[i] == km.assignment[j]) == (((best_mask >> i) & 1u) == ((best_mask >> j) & 1u)));
  const auto& flat = km.anchors.anchors[0].width > km.anchors.anchors[1].width ? km.anchors.anchors[0]
                                                                              : km.anchors.anchors[1];
  const auto& tall = &flat == &km.anchors.anchors[0] ? km.anchors.anchors[1] : km.anchors.anchors[0];
  CHECK(flat.width >= 90);
  CHECK(flat.width <= 110);
  CHECK(flat.height >= 8);
  CHECK(flat.height <= 12);
  CHECK(tall.width >= 8);
  CHECK(tall.width <= 12);
  CHECK(tall.height >= 180);
  CHECK(tall.height <= 220);
}

TEST_CASE("anchor text round trip") {
  const auto pyr = default_anchor_pyramid();
  const auto parsed = parse_anchors_text(anchors_text(pyr));
  REQUIRE(parsed.size() == 45);
  for (std::size_t i = 0; i < 45; ++i) CHECK(parsed[i].width == doctest::Approx(pyr.anchors[i].width).epsilon(1e-6));
  CHECK_THROWS(parse_anchors_text("1 2\nx y\n"));
}
