#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "emspec/geometry.hpp"
#include "emspec/scene.hpp"
#include "emspec/spectrogram.hpp"

namespace emspec {

/// Malformed text input; the message carries `file:line: reason`.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// `class cx cy w h`, normalized by 512, six decimals.
std::string format_label_line(const Annotation& a);
/// Label line plus a trailing score.
std::string format_prediction_line(const Detection& d);

void write_label_file(const std::filesystem::path& path, const std::vector<Annotation>& annotations);
std::vector<Annotation> read_label_file(const std::filesystem::path& path);

void write_prediction_file(const std::filesystem::path& path, const std::vector<Detection>& detections);
std::vector<Detection> read_prediction_file(const std::filesystem::path& path);

/// Every `*.txt` in a directory, keyed by file stem (the scene id).
std::map<std::string, std::vector<Detection>> read_predictions(const std::filesystem::path& dir);

/// 8-bit grayscale; value = floor(p * 255 + 0.5).
void write_png(const SpectrogramImage& image, const std::filesystem::path& path);
/// Reads an 8-bit grayscale PNG back to p = value / 255.
SpectrogramImage read_png(const std::filesystem::path& path);
std::uint8_t quantize_pixel(double p);

/// One scene id per line.
void write_manifest(const std::filesystem::path& path, const std::vector<std::string>& ids);
std::vector<std::string> read_manifest(const std::filesystem::path& path);

/// `train` header, its ids, `test` header, its ids.
void write_split(const std::filesystem::path& path, const SplitManifest& split);
SplitManifest read_split(const std::filesystem::path& path);

/// Key-value JSON echo of a scene's configuration.
void write_provenance(const std::filesystem::path& path, const SceneConfig& scene);
SceneConfig read_provenance(const std::filesystem::path& path);

std::vector<Annotation> annotations_for(const SceneConfig& scene);

/// Writes text with LF endings, replacing the file atomically enough for
/// single-writer use.
void write_text_file(const std::filesystem::path& path, std::string_view text);

/// Standard layout of a generated dataset rooted at `root`.
struct DatasetLayout {
  std::filesystem::path root;

  std::filesystem::path images() const { return root / "images"; }
  std::filesystem::path labels() const { return root / "labels"; }
  std::filesystem::path predictions() const { return root / "predictions"; }
  std::filesystem::path provenance() const { return root / "provenance"; }
  std::filesystem::path iq() const { return root / "iq"; }
  std::filesystem::path manifest() const { return root / "manifest.txt"; }
  std::filesystem::path split() const { return root / "split.txt"; }

  std::filesystem::path image(const std::string& id) const { return images() / (id + ".png"); }
  std::filesystem::path label(const std::string& id) const { return labels() / (id + ".txt"); }
  std::filesystem::path provenance(const std::string& id) const { return provenance() / (id + ".json"); }
};

}  // namespace emspec
