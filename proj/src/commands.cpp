#include "emspec/commands.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdio>
#include <exception>
#include <functional>
#include <fstream>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "emspec/synthesis.hpp"

namespace emspec {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSplitStream = 0x53504c4954ULL;

std::string trim(std::string s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw std::invalid_argument("config " + key + ": not a number: '" + v + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw std::invalid_argument("config " + key + ": expected true or false, got '" + v + "'");
}

template <class T>
std::string number_text(T v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

struct Key {
  std::string name;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <class T>
Key number_key(std::string name, T RunConfig::*field) {
  return {name, [name, field](RunConfig& c, const std::string& v) { c.*field = parse_number<T>(name, v); },
          [field](const RunConfig& c) { return number_text(c.*field); }};
}

Key double_key(std::string name, std::function<double&(RunConfig&)> ref) {
  return {name, [name, ref](RunConfig& c, const std::string& v) { ref(c) = parse_number<double>(name, v); },
          [ref](const RunConfig& c) { return number_text(ref(const_cast<RunConfig&>(c))); }};
}

Key bool_key(std::string name, bool RunConfig::*field) {
  return {name, [name, field](RunConfig& c, const std::string& v) { c.*field = parse_bool(name, v); },
          [field](const RunConfig& c) { return std::string(c.*field ? "true" : "false"); }};
}

Key int_key(std::string name, std::function<int&(RunConfig&)> ref) {
  return {name, [name, ref](RunConfig& c, const std::string& v) { ref(c) = parse_number<int>(name, v); },
          [ref](const RunConfig& c) { return std::to_string(ref(const_cast<RunConfig&>(c))); }};
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return out;
}

const std::vector<Key>& keys() {
  static const std::vector<Key> table = [] {
    std::vector<Key> k;
    k.push_back(number_key("seed", &RunConfig::seed));
    k.push_back({"out", [](RunConfig& c, const std::string& v) { c.out = v; },
                 [](const RunConfig& c) { return c.out.string(); }});
    k.push_back(number_key("jobs", &RunConfig::jobs));
    k.push_back({"combos_per_k",
                 [](RunConfig& c, const std::string& v) {
                   c.combos_per_k = v == "all" ? 0 : parse_number<int>("combos_per_k", v);
                   if (c.combos_per_k < 0 || (c.combos_per_k == 0 && v != "all")) {
                     throw std::invalid_argument("config combos_per_k: expected 'all' or a positive count");
                   }
                 },
                 [](const RunConfig& c) {
                   return c.combos_per_k == 0 ? std::string("all") : std::to_string(c.combos_per_k);
                 }});
    k.push_back(number_key("k_min", &RunConfig::k_min));
    k.push_back(number_key("k_max", &RunConfig::k_max));
    k.push_back(number_key("configs", &RunConfig::configs));
    k.push_back(number_key("realizations", &RunConfig::realizations));
    k.push_back(number_key("max_instances", &RunConfig::max_instances));
    k.push_back(number_key("test_fraction", &RunConfig::test_fraction));
    for (SignalClass cls : kAllClasses) {
      const std::string n = lower(to_string(cls));
      const auto id = static_cast<std::size_t>(class_id(cls));
      k.push_back(double_key("bandwidth_" + n + "_min", [id](RunConfig& c) -> double& {
        return c.ranges.bandwidth_hz[id].lo;
      }));
      k.push_back(double_key("bandwidth_" + n + "_max", [id](RunConfig& c) -> double& {
        return c.ranges.bandwidth_hz[id].hi;
      }));
    }
    k.push_back(double_key("snr_min", [](RunConfig& c) -> double& { return c.ranges.snr_db.lo; }));
    k.push_back(double_key("snr_max", [](RunConfig& c) -> double& { return c.ranges.snr_db.hi; }));
    k.push_back(double_key("fc_min", [](RunConfig& c) -> double& { return c.ranges.center_freq_hz.lo; }));
    k.push_back(double_key("fc_max", [](RunConfig& c) -> double& { return c.ranges.center_freq_hz.hi; }));
    k.push_back(double_key("arrival_max", [](RunConfig& c) -> double& { return c.ranges.arrival_max_s; }));
    k.push_back(double_key("duration_min", [](RunConfig& c) -> double& { return c.ranges.duration_min_s; }));
    k.push_back({"nfft", [](RunConfig& c, const std::string& v) { c.stft.nfft = parse_number<std::size_t>("nfft", v); },
                 [](const RunConfig& c) { return std::to_string(c.stft.nfft); }});
    k.push_back({"window_length",
                 [](RunConfig& c, const std::string& v) {
                   c.stft.window_length = parse_number<std::size_t>("window_length", v);
                 },
                 [](const RunConfig& c) { return std::to_string(c.stft.window_length); }});
    k.push_back({"hop", [](RunConfig& c, const std::string& v) { c.stft.hop = parse_number<std::size_t>("hop", v); },
                 [](const RunConfig& c) { return std::to_string(c.stft.hop); }});
    k.push_back(bool_key("dump_iq", &RunConfig::dump_iq));
    k.push_back(bool_key("labels_only", &RunConfig::labels_only));
    k.push_back(bool_key("svg", &RunConfig::svg));
    k.push_back({"anchor_mode", [](RunConfig& c, const std::string& v) { c.anchor_mode = v; },
                 [](const RunConfig& c) { return c.anchor_mode; }});
    k.push_back(number_key("anchor_k", &RunConfig::anchor_k));
    k.push_back(number_key("anchor_iou", &RunConfig::anchor_iou));
    k.push_back(number_key("ratio_threshold", &RunConfig::ratio_threshold));
    k.push_back(double_key("det_k", [](RunConfig& c) -> double& { return c.detector.k; }));
    k.push_back(int_key("det_half_time", [](RunConfig& c) -> int& { return c.detector.half_time; }));
    k.push_back(int_key("det_half_freq", [](RunConfig& c) -> int& { return c.detector.half_freq; }));
    k.push_back(int_key("det_connectivity", [](RunConfig& c) -> int& { return c.detector.connectivity; }));
    k.push_back(int_key("det_min_area", [](RunConfig& c) -> int& { return c.detector.min_area; }));
    k.push_back({"predictions", [](RunConfig& c, const std::string& v) { c.predictions = v; },
                 [](const RunConfig& c) { return c.predictions.string(); }});
    k.push_back({"ids", [](RunConfig& c, const std::string& v) { c.ids = v; },
                 [](const RunConfig& c) { return c.ids.string(); }});
    k.push_back({"subset", [](RunConfig& c, const std::string& v) { c.subset = v; },
                 [](const RunConfig& c) { return c.subset; }});
    k.push_back(bool_key("class_agnostic", &RunConfig::class_agnostic));
    k.push_back(number_key("max_dets", &RunConfig::max_dets));
    return k;
  }();
  return table;
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
  for (const Key& k : keys()) {
    if (k.name == key) {
      k.set(*this, trim(value));
      return;
    }
  }
  throw std::invalid_argument("unknown config key '" + key + "'");
}

void RunConfig::load(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config " + path.string());
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument(path.string() + ":" + std::to_string(line_no) + ": expected key = value");
    }
    try {
      set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

std::string RunConfig::to_text() const {
  std::string out;
  for (const Key& k : keys()) out += k.name + " = " + k.get(*this) + "\n";
  return out;
}

void RunConfig::validate() const {
  if (configs < 1 || realizations < 1) throw std::invalid_argument("configs and realizations must be >= 1");
  if (k_min < 1 || k_min > k_max || k_max > 4) throw std::invalid_argument("need 1 <= k_min <= k_max <= 4");
  if (max_instances < 0 || max_instances > 13) throw std::invalid_argument("max_instances must be in 0..13");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw std::invalid_argument("test_fraction must be in (0, 1)");
  ranges.validate();
  stft.validate();
  detector.validate();
  if (anchor_mode != "default-report" && anchor_mode != "kmeans") {
    throw std::invalid_argument("anchor_mode must be default-report or kmeans");
  }
  if (anchor_k < 1) throw std::invalid_argument("anchor_k must be >= 1");
  if (!(anchor_iou > 0.0 && anchor_iou <= 1.0)) throw std::invalid_argument("anchor_iou must be in (0, 1]");
  if (!(ratio_threshold >= 1.0)) throw std::invalid_argument("ratio_threshold must be >= 1");
  if (subset != "all" && subset != "train" && subset != "test") {
    throw std::invalid_argument("subset must be all, train or test");
  }
  if (max_dets < 1) throw std::invalid_argument("max_dets must be >= 1");
}

DatasetPlan RunConfig::plan() const {
  DatasetPlan p = DatasetPlan::defaults(seed);
  p.configs_per_combo = configs;
  p.realizations_per_config = realizations;
  p.max_instances = max_instances;
  p.ranges = ranges;
  const std::vector<Combo> all = p.combos;
  p.combos.clear();
  p.combo_indices.clear();
  std::map<std::size_t, int> taken;
  for (std::size_t i = 0; i < all.size(); ++i) {
    const auto k = static_cast<int>(all[i].size());
    if (k < k_min || k > k_max) continue;
    if (combos_per_k > 0 && taken[all[i].size()] >= combos_per_k) continue;
    ++taken[all[i].size()];
    p.combos.push_back(all[i]);
    p.combo_indices.push_back(static_cast<int>(i));
  }
  return p;
}

unsigned RunConfig::worker_count() const {
  if (jobs > 0) return jobs;
  return std::max(1u, std::thread::hardware_concurrency());
}

fs::path RunConfig::predictions_dir() const {
  return predictions.empty() ? DatasetLayout{out}.predictions() : predictions;
}

namespace {

/// Runs fn(i) for i in [0, n) on `workers` threads. The first exception
/// stops the pool and is rethrown after join.
void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& fn) {
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    while (!failed) {
      const std::size_t i = next++;
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed = true;
      }
    }
  };
  const unsigned count = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < count; ++t) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

std::vector<std::string> cmd_generate(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const DatasetPlan plan = cfg.plan();
  const std::vector<SceneConfig> scenes = plan_dataset(plan);
  const DatasetLayout layout{cfg.out};
  fs::create_directories(layout.labels());
  fs::create_directories(layout.provenance());
  if (!cfg.labels_only) fs::create_directories(layout.images());
  if (cfg.dump_iq) fs::create_directories(layout.iq());

  log << "generate: " << scenes.size() << " scenes (" << plan.combos.size() << " combos x " << plan.configs_per_combo
      << " configs x " << plan.realizations_per_config << " realizations) into " << cfg.out.string() << "\n";

  std::mutex log_mutex;
  std::atomic<std::size_t> done{0};
  parallel_for(scenes.size(), cfg.worker_count(), [&](std::size_t i) {
    const SceneConfig& scene = scenes[i];
    const std::string id = scene.scene_id();
    write_label_file(layout.label(id), annotations_for(scene));
    write_provenance(layout.provenance(id), scene);
    if (!cfg.labels_only) {
      Rng rng(scene.stream_id);
      const IqBuffer iq = compose_scene(scene, NoiseModel{}, rng);
      if (cfg.dump_iq) write_iq(iq, layout.iq() / (id + ".iq"));
      write_png(render_spectrogram(iq, cfg.stft), layout.image(id));
    }
    const std::size_t d = ++done;
    if (!cfg.labels_only && (d % 10 == 0 || d == scenes.size())) {
      std::lock_guard lock(log_mutex);
      log << "  " << d << "/" << scenes.size() << "\n" << std::flush;
    }
  });

  std::vector<std::string> ids;
  ids.reserve(scenes.size());
  for (const SceneConfig& s : scenes) ids.push_back(s.scene_id());
  write_manifest(layout.manifest(), ids);
  const SplitManifest split = split_train_test(ids, cfg.test_fraction, derive_stream(cfg.seed, {kSplitStream}));
  write_split(layout.split(), split);
  log << "wrote manifest (" << ids.size() << " ids), split " << split.train.size() << " train / "
      << split.test.size() << " test\n";
  return ids;
}

std::vector<std::string> selected_ids(const RunConfig& cfg) {
  const DatasetLayout layout{cfg.out};
  if (!fs::exists(layout.manifest())) throw std::runtime_error("no dataset manifest at " + layout.manifest().string());
  std::vector<std::string> ids = read_manifest(layout.manifest());
  if (cfg.subset != "all") {
    const SplitManifest split = read_split(layout.split());
    ids = cfg.subset == "train" ? split.train : split.test;
  }
  if (!cfg.ids.empty()) {
    const std::set<std::string> allowed(ids.begin(), ids.end());
    std::vector<std::string> chosen;
    for (const std::string& id : read_manifest(cfg.ids)) {
      if (!allowed.count(id)) throw std::invalid_argument("id list names unknown scene '" + id + "'");
      chosen.push_back(id);
    }
    ids = chosen;
  }
  return ids;
}

GroundTruthSet load_ground_truth(const DatasetLayout& layout, const std::vector<std::string>& ids) {
  GroundTruthSet gt;
  for (const std::string& id : ids) {
    const fs::path p = layout.label(id);
    if (!fs::exists(p)) throw std::runtime_error("missing labels for scene " + id + " (" + p.string() + ")");
    gt[id] = read_label_file(p);
  }
  return gt;
}

std::vector<BoundingBox> all_boxes(const GroundTruthSet& gt) {
  std::vector<BoundingBox> out;
  for (const auto& [id, anns] : gt) {
    for (const Annotation& a : anns) out.push_back(a.box);
  }
  return out;
}

BoxStats cmd_stats(const RunConfig& cfg, std::ostream& log) {
  const DatasetLayout layout{cfg.out};
  const std::vector<BoundingBox> boxes = all_boxes(load_ground_truth(layout, selected_ids(cfg)));
  if (boxes.empty()) throw std::runtime_error("no annotations");
  const BoxStats st = box_stats(boxes);
  const fs::path dir = cfg.out / "stats";
  fs::create_directories(dir);
  write_text_file(dir / "aspect_ratio_hist.csv", histogram_csv(st.ratio_hist));
  write_text_file(dir / "side_length_hist.csv", histogram_csv(st.side_hist));
  if (cfg.svg) {
    write_text_file(dir / "aspect_ratio_hist.svg", histogram_svg(st.ratio_hist, "Aspect ratio (w/h)", true));
    write_text_file(dir / "side_length_hist.svg", histogram_svg(st.side_hist, "Side length (px)", false));
  }
  char buf[256];
  std::snprintf(buf, sizeof buf, "boxes %zu aspect_ratio min %.6g max %.6g geomean %.6g spread %.6g\n", boxes.size(),
                st.min_ratio(), st.max_ratio(), st.geomean_ratio(), st.max_ratio() / st.min_ratio());
  log << buf;
  return st;
}

AnchorReport cmd_anchors(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const DatasetLayout layout{cfg.out};
  const std::vector<BoundingBox> boxes = all_boxes(load_ground_truth(layout, selected_ids(cfg)));
  if (boxes.empty()) throw std::runtime_error("no annotations");
  const fs::path dir = cfg.out / "anchors";
  fs::create_directories(dir);
  AnchorReport rep;
  char buf[256];
  std::string report;
  if (cfg.anchor_mode == "default-report") {
    rep.anchors = default_anchor_pyramid();
    rep.match = match_rate(boxes, rep.anchors, cfg.anchor_iou, kImageSize, cfg.ratio_threshold);
    std::snprintf(buf, sizeof buf,
                  "mode default-report\nboxes %zu\nanchor_shapes %zu\nanchor_placements %zu\niou_threshold %.6g\n"
                  "matched_fraction %.6f\nbest_possible_recall %.6f\n",
                  boxes.size(), rep.anchors.anchors.size(), rep.anchors.placement_count(), cfg.anchor_iou,
                  rep.match.matched_fraction, rep.match.best_possible_recall);
  } else {
    const KMeansResult km = kmeans_anchors(boxes, cfg.anchor_k, cfg.seed, 300, cfg.ratio_threshold);
    rep.anchors = km.anchors;
    rep.kmeans_bpr = km.best_possible_recall;
    rep.match = match_rate(boxes, rep.anchors, cfg.anchor_iou, kImageSize, cfg.ratio_threshold);
    std::snprintf(buf, sizeof buf,
                  "mode kmeans\nboxes %zu\nk %zu\nseed %llu\niterations %zu\nmean_1_minus_iou %.6f\n"
                  "best_possible_recall %.6f\ncocentered_matched_fraction %.6f\n",
                  boxes.size(), cfg.anchor_k, static_cast<unsigned long long>(cfg.seed), km.objective.size(),
                  km.objective.back(), km.best_possible_recall, rep.match.matched_fraction);
  }
  report = buf;
  write_text_file(dir / (cfg.anchor_mode + ".txt"), anchors_text(rep.anchors));
  write_text_file(dir / (cfg.anchor_mode + "_report.txt"), report);
  log << report;
  return rep;
}

std::size_t cmd_detect_baseline(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const DatasetLayout layout{cfg.out};
  const std::vector<std::string> ids = selected_ids(cfg);
  const fs::path dir = cfg.predictions_dir();
  fs::create_directories(dir);
  std::atomic<std::size_t> total{0};
  parallel_for(ids.size(), cfg.worker_count(), [&](std::size_t i) {
    const fs::path img = layout.image(ids[i]);
    if (!fs::exists(img)) throw std::runtime_error("missing image for scene " + ids[i]);
    const std::vector<Detection> dets = detect(read_png(img).pixels, cfg.detector);
    write_prediction_file(dir / (ids[i] + ".txt"), dets);
    total += dets.size();
  });
  log << "detect-baseline: " << total << " detections over " << ids.size() << " images into " << dir.string()
      << "\n";
  return total;
}

EvalSummary cmd_evaluate(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const DatasetLayout layout{cfg.out};
  const std::vector<std::string> ids = selected_ids(cfg);
  const GroundTruthSet gt = load_ground_truth(layout, ids);
  const std::vector<std::string> manifest = read_manifest(layout.manifest());
  const std::set<std::string> known(manifest.begin(), manifest.end());

  PredictionSet preds;
  for (auto& [id, dets] : read_predictions(cfg.predictions_dir())) {
    if (!known.count(id)) throw std::invalid_argument("prediction file for unknown scene id '" + id + "'");
    // Scenes outside the selected subset are skipped, not rejected.
    if (gt.count(id)) preds[id] = std::move(dets);
  }
  EvalOptions opts;
  opts.class_agnostic = cfg.class_agnostic;
  opts.max_dets = cfg.max_dets;
  const EvalSummary s = evaluate(gt, preds, opts);
  const fs::path dir = cfg.out / "eval";
  fs::create_directories(dir);
  write_text_file(dir / "summary.csv", summary_csv(s));
  write_text_file(dir / "summary.txt", summary_text(s));
  log << summary_text(s);
  return s;
}

}  // namespace emspec
