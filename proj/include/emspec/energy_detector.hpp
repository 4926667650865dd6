#pragma once

#include <vector>

#include "emspec/geometry.hpp"
#include "emspec/grid.hpp"

namespace emspec {

struct EnergyDetectorConfig {
  /// Box filter half-widths; the filter is (2t+1) rows by (2f+1) columns.
  int half_time = 1;
  int half_freq = 4;
  double k = 4.0;
  int connectivity = 8;
  int min_area = 16;

  void validate() const;
};

struct NoiseFloor {
  double floor = 0.0;
  double spread = 0.0;
};

/// Lower median and 1.4826 * MAD (MAD also a lower median).
NoiseFloor estimate_noise_floor(const Grid<double>& image);

/// Edge-clamped mean filter.
Grid<double> box_filter(const Grid<double>& image, int half_rows, int half_cols);

/// Component labels of a binary mask, 0 for background, 1.. in scan order.
Grid<int> label_components(const Grid<unsigned char>& mask, int connectivity);

/// Pixels kept by detect(): raw above-threshold pixels of components that
/// pass min_area.
Grid<unsigned char> foreground(const Grid<double>& image, const EnergyDetectorConfig& cfg = {});

/// Smooths, thresholds at floor + k * spread (strictly above), labels
/// components, and reports each component's raw above-threshold pixels as
/// one class-0 detection scored by their mean intensity.
std::vector<Detection> detect(const Grid<double>& image, const EnergyDetectorConfig& cfg = {});

}  // namespace emspec
