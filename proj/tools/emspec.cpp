// Command-line front end: generate, stats, anchors, detect-baseline, evaluate.

#include <exception>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "emspec/commands.hpp"

namespace {

struct Overrides {
  std::vector<std::pair<std::string, std::string>> order;
  std::map<std::string, std::string> values;
  std::map<std::string, bool> flags;
};

void value_flag(CLI::App* app, Overrides& ov, const std::string& flag, const std::string& key, const std::string& help) {
  app->add_option_function<std::string>(
      flag, [&ov, key](const std::string& v) { ov.order.emplace_back(key, v); }, help);
}

void bool_flag(CLI::App* app, Overrides& ov, const std::string& flag, const std::string& key, const std::string& help) {
  app->add_flag_callback(flag, [&ov, key] { ov.order.emplace_back(key, "true"); }, help);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic RF spectrogram dataset generator, anchor analysis, energy baseline and COCO scorer"};
  app.require_subcommand(0, 1);

  Overrides ov;
  std::string config_path;
  bool print_config = false;
  std::vector<std::string> sets;
  app.add_option("--config", config_path, "key = value config file")->check(CLI::ExistingFile);
  value_flag(&app, ov, "--seed", "seed", "master seed");
  value_flag(&app, ov, "--out", "out", "dataset directory");
  value_flag(&app, ov, "--jobs", "jobs", "worker threads (0: hardware threads)");
  app.add_option("--set", sets, "extra key=value override, repeatable");
  app.add_flag("--print-config", print_config, "print the effective configuration and exit");

  auto* gen = app.add_subcommand("generate", "synthesize scenes, render spectrograms, write labels");
  value_flag(gen, ov, "--combos-per-k", "combos_per_k", "'all' or first N combos of each size");
  value_flag(gen, ov, "--k-min", "k_min", "smallest combo size");
  value_flag(gen, ov, "--k-max", "k_max", "largest combo size");
  value_flag(gen, ov, "--configs", "configs", "metadata configurations per combo");
  value_flag(gen, ov, "--realizations", "realizations", "timing realizations per configuration");
  value_flag(gen, ov, "--max-instances", "max_instances", "instances per scene upper bound (0: one per class)");
  value_flag(gen, ov, "--test-fraction", "test_fraction", "share of scenes in the test split");
  value_flag(gen, ov, "--snr-min", "snr_min", "SNR range low, dB");
  value_flag(gen, ov, "--snr-max", "snr_max", "SNR range high, dB");
  bool_flag(gen, ov, "--dump-iq", "dump_iq", "also write raw float32 I/Q captures");
  bool_flag(gen, ov, "--labels-only", "labels_only", "plan and label only, skip synthesis");

  auto* stats = app.add_subcommand("stats", "aspect ratio and side length histograms");
  bool_flag(stats, ov, "--svg", "svg", "also write SVG bar charts");
  value_flag(stats, ov, "--subset", "subset", "all, train or test");

  auto* anchors = app.add_subcommand("anchors", "default pyramid match report or k-means anchors");
  value_flag(anchors, ov, "--mode", "anchor_mode", "default-report or kmeans");
  value_flag(anchors, ov, "--k", "anchor_k", "k-means cluster count");
  value_flag(anchors, ov, "--iou", "anchor_iou", "IoU threshold for the match rate");
  value_flag(anchors, ov, "--subset", "subset", "all, train or test");

  auto* det = app.add_subcommand("detect-baseline", "energy-threshold detector over the dataset images");
  value_flag(det, ov, "--k", "det_k", "threshold = floor + k * spread");
  value_flag(det, ov, "--connectivity", "det_connectivity", "4 or 8");
  value_flag(det, ov, "--min-area", "det_min_area", "smallest component in pixels");
  value_flag(det, ov, "--predictions", "predictions", "output directory (default <out>/predictions)");
  value_flag(det, ov, "--subset", "subset", "all, train or test");

  auto* ev = app.add_subcommand("evaluate", "COCO-style MaP and AR@100 of a predictions directory");
  value_flag(ev, ov, "--predictions", "predictions", "predictions directory (default <out>/predictions)");
  value_flag(ev, ov, "--ids", "ids", "file listing the scene ids to score");
  value_flag(ev, ov, "--subset", "subset", "all, train or test");
  bool_flag(ev, ov, "--class-agnostic", "class_agnostic", "ignore class ids");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    emspec::RunConfig cfg;
    if (!config_path.empty()) cfg.load(config_path);
    for (const auto& [k, v] : ov.order) cfg.set(k, v);
    for (const std::string& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value, got '" + s + "'");
      cfg.set(s.substr(0, eq), s.substr(eq + 1));
    }
    cfg.validate();

    if (print_config) {
      std::cout << cfg.to_text();
      return 0;
    }
    if (gen->parsed()) {
      emspec::cmd_generate(cfg, std::cout);
    } else if (stats->parsed()) {
      emspec::cmd_stats(cfg, std::cout);
    } else if (anchors->parsed()) {
      emspec::cmd_anchors(cfg, std::cout);
    } else if (det->parsed()) {
      emspec::cmd_detect_baseline(cfg, std::cout);
    } else if (ev->parsed()) {
      emspec::cmd_evaluate(cfg, std::cout);
    } else {
      std::cout << app.help();
      return 2;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
