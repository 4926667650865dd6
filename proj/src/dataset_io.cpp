#include "emspec/dataset_io.hpp"

#include <png.h>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace emspec {

namespace fs = std::filesystem;

namespace {

constexpr double kPx = static_cast<double>(kImageSize);

std::string read_text_file(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

[[noreturn]] void parse_fail(const fs::path& path, std::size_t line_no, const std::string& why) {
  throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + why);
}

double parse_double(std::string_view s, const fs::path& path, std::size_t line_no) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    parse_fail(path, line_no, "not a number: '" + std::string(s) + "'");
  }
  return v;
}

int parse_class(std::string_view s, const fs::path& path, std::size_t line_no) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || v < 0 || v > 5) {
    parse_fail(path, line_no, "class id must be an integer in 0..5, got '" + std::string(s) + "'");
  }
  return v;
}

struct ParsedBox {
  int class_id;
  BoundingBox box;
};

ParsedBox parse_box_fields(const std::vector<std::string_view>& f, const fs::path& path, std::size_t line_no) {
  const int cls = parse_class(f[0], path, line_no);
  const double cx = parse_double(f[1], path, line_no);
  const double cy = parse_double(f[2], path, line_no);
  const double w = parse_double(f[3], path, line_no);
  const double h = parse_double(f[4], path, line_no);
  if (!(w > 0.0) || !(h > 0.0)) parse_fail(path, line_no, "box width and height must be positive");
  BoundingBox b{(cx - w / 2) * kPx, (cy - h / 2) * kPx, (cx + w / 2) * kPx, (cy + h / 2) * kPx};
  return {cls, b};
}

std::string box_fields(int class_id, const BoundingBox& b) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%d %.6f %.6f %.6f %.6f", class_id, (b.x_min + b.x_max) / 2 / kPx,
                (b.y_min + b.y_max) / 2 / kPx, b.width() / kPx, b.height() / kPx);
  return buf;
}

}  // namespace

void write_text_file(const fs::path& path, std::string_view text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

std::string format_label_line(const Annotation& a) { return box_fields(a.class_id, a.box); }

std::string format_prediction_line(const Detection& d) {
  char buf[32];
  std::snprintf(buf, sizeof buf, " %.6f", d.score);
  return box_fields(d.class_id, d.box) + buf;
}

void write_label_file(const fs::path& path, const std::vector<Annotation>& annotations) {
  std::string text;
  for (const Annotation& a : annotations) text += format_label_line(a) + "\n";
  write_text_file(path, text);
}

std::vector<Annotation> read_label_file(const fs::path& path) {
  const std::string text = read_text_file(path);
  std::vector<Annotation> out;
  std::size_t line_no = 0;
  for (std::string_view line : split_lines(text)) {
    ++line_no;
    const auto f = split_fields(line);
    if (f.empty()) continue;
    if (f.size() != 5) parse_fail(path, line_no, "expected 5 fields (class cx cy w h), got " + std::to_string(f.size()));
    const ParsedBox p = parse_box_fields(f, path, line_no);
    out.push_back({p.class_id, p.box});
  }
  return out;
}

void write_prediction_file(const fs::path& path, const std::vector<Detection>& detections) {
  std::string text;
  for (const Detection& d : detections) text += format_prediction_line(d) + "\n";
  write_text_file(path, text);
}

std::vector<Detection> read_prediction_file(const fs::path& path) {
  const std::string text = read_text_file(path);
  std::vector<Detection> out;
  std::size_t line_no = 0;
  for (std::string_view line : split_lines(text)) {
    ++line_no;
    const auto f = split_fields(line);
    if (f.empty()) continue;
    if (f.size() == 5) parse_fail(path, line_no, "missing score column");
    if (f.size() != 6) {
      parse_fail(path, line_no, "expected 6 fields (class cx cy w h score), got " + std::to_string(f.size()));
    }
    const ParsedBox p = parse_box_fields(f, path, line_no);
    const double score = parse_double(f[5], path, line_no);
    if (score < 0.0 || score > 1.0) parse_fail(path, line_no, "score outside [0, 1]");
    out.push_back({p.class_id, p.box, score});
  }
  return out;
}

std::map<std::string, std::vector<Detection>> read_predictions(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw std::runtime_error("predictions directory not found: " + dir.string());
  std::map<std::string, std::vector<Detection>> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    out[entry.path().stem().string()] = read_prediction_file(entry.path());
  }
  return out;
}

std::uint8_t quantize_pixel(double p) {
  const double v = std::floor(std::clamp(p, 0.0, 1.0) * 255.0 + 0.5);
  return static_cast<std::uint8_t>(v);
}

void write_png(const SpectrogramImage& image, const fs::path& path) {
  const Grid<double>& px = image.pixels;
  if (px.empty()) throw std::invalid_argument("write_png: empty image");
  std::vector<std::uint8_t> bytes(px.size());
  for (std::size_t i = 0; i < px.size(); ++i) bytes[i] = quantize_pixel(px.data()[i]);

  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(px.cols());
  img.height = static_cast<png_uint_32>(px.rows());
  img.format = PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&img, path.string().c_str(), 0, bytes.data(), 0, nullptr)) {
    const std::string msg = img.message;
    png_image_free(&img);
    throw std::runtime_error("write_png " + path.string() + ": " + msg);
  }
}

SpectrogramImage read_png(const fs::path& path) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.string().c_str())) {
    throw std::runtime_error("read_png " + path.string() + ": " + img.message);
  }
  img.format = PNG_FORMAT_GRAY;
  std::vector<std::uint8_t> bytes(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, bytes.data(), 0, nullptr)) {
    const std::string msg = img.message;
    png_image_free(&img);
    throw std::runtime_error("read_png " + path.string() + ": " + msg);
  }
  SpectrogramImage out;
  out.pixels = Grid<double>(img.height, img.width);
  for (std::size_t i = 0; i < bytes.size(); ++i) out.pixels.data()[i] = bytes[i] / 255.0;
  return out;
}

void write_manifest(const fs::path& path, const std::vector<std::string>& ids) {
  std::string text;
  for (const auto& id : ids) text += id + "\n";
  write_text_file(path, text);
}

std::vector<std::string> read_manifest(const fs::path& path) {
  const std::string text = read_text_file(path);
  std::vector<std::string> ids;
  for (std::string_view line : split_lines(text)) {
    const auto f = split_fields(line);
    if (!f.empty()) ids.emplace_back(f[0]);
  }
  return ids;
}

void write_split(const fs::path& path, const SplitManifest& split) {
  std::string text = "train\n";
  for (const auto& id : split.train) text += id + "\n";
  text += "test\n";
  for (const auto& id : split.test) text += id + "\n";
  write_text_file(path, text);
}

SplitManifest read_split(const fs::path& path) {
  SplitManifest m;
  std::vector<std::string>* section = nullptr;
  std::size_t line_no = 0;
  const std::string text = read_text_file(path);
  for (std::string_view line : split_lines(text)) {
    ++line_no;
    const auto f = split_fields(line);
    if (f.empty()) continue;
    if (f[0] == "train") {
      section = &m.train;
    } else if (f[0] == "test") {
      section = &m.test;
    } else if (section == nullptr) {
      parse_fail(path, line_no, "scene id before any train/test header");
    } else {
      section->emplace_back(f[0]);
    }
  }
  return m;
}

std::vector<Annotation> annotations_for(const SceneConfig& scene) {
  std::vector<Annotation> out;
  for (const SignalSpec& s : scene.specs) out.push_back({class_id(s.cls), bbox_from_spec(s)});
  return out;
}

void write_provenance(const fs::path& path, const SceneConfig& scene) {
  nlohmann::ordered_json j;
  j["scene_id"] = scene.scene_id();
  j["combo_index"] = scene.combo_index;
  j["config_index"] = scene.config_index;
  j["realization_index"] = scene.realization_index;
  j["stream_id"] = scene.stream_id;
  auto& combo = j["combo"] = nlohmann::ordered_json::array();
  for (SignalClass c : scene.combo) combo.push_back(std::string(to_string(c)));
  auto& signals = j["signals"] = nlohmann::ordered_json::array();
  for (const SignalSpec& s : scene.specs) {
    nlohmann::ordered_json e;
    e["class"] = std::string(to_string(s.cls));
    e["center_freq_hz"] = s.center_freq_hz;
    e["bandwidth_hz"] = s.bandwidth_hz;
    e["snr_db"] = s.snr_db;
    e["arrival_s"] = s.arrival_s;
    e["duration_s"] = s.duration_s;
    e["stream_id"] = s.stream_id;
    signals.push_back(std::move(e));
  }
  write_text_file(path, j.dump(2) + "\n");
}

SceneConfig read_provenance(const fs::path& path) {
  SceneConfig scene;
  try {
    const auto j = nlohmann::json::parse(read_text_file(path));
    scene.combo_index = j.at("combo_index").get<int>();
    scene.config_index = j.at("config_index").get<int>();
    scene.realization_index = j.at("realization_index").get<int>();
    scene.stream_id = j.at("stream_id").get<std::uint64_t>();
    for (const auto& c : j.at("combo")) {
      const auto cls = parse_signal_class(c.get<std::string>());
      if (!cls) throw std::runtime_error("unknown class " + c.get<std::string>());
      scene.combo.push_back(*cls);
    }
    for (const auto& e : j.at("signals")) {
      SignalSpec s;
      const auto cls = parse_signal_class(e.at("class").get<std::string>());
      if (!cls) throw std::runtime_error("unknown class " + e.at("class").get<std::string>());
      s.cls = *cls;
      s.center_freq_hz = e.at("center_freq_hz").get<double>();
      s.bandwidth_hz = e.at("bandwidth_hz").get<double>();
      s.snr_db = e.at("snr_db").get<double>();
      s.arrival_s = e.at("arrival_s").get<double>();
      s.duration_s = e.at("duration_s").get<double>();
      s.stream_id = e.at("stream_id").get<std::uint64_t>();
      scene.specs.push_back(s);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return scene;
}

}  // namespace emspec
