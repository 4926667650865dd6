#pragma once

#include "emspec/signal.hpp"

namespace emspec {

/// Axis-aligned box in image pixels, edges in [0, 512]. x is frequency,
/// y is time.
struct BoundingBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }
  bool valid() const { return x_min < x_max && y_min < y_max; }

  bool operator==(const BoundingBox&) const = default;
};

struct Annotation {
  int class_id = 0;
  BoundingBox box;

  bool operator==(const Annotation&) const = default;
};

struct Detection {
  int class_id = 0;
  BoundingBox box;
  double score = 0.0;

  bool operator==(const Detection&) const = default;
};

/// Intersection over union; 0 for disjoint boxes.
double iou(const BoundingBox& a, const BoundingBox& b);

/// Maps signal metadata to pixels: frequency -50..50 MHz onto x 0..512,
/// time 0..50 ms onto y 0..512, clamped to the image.
BoundingBox bbox_from_spec(const SignalSpec& spec);

}  // namespace emspec
