#pragma once

#include <array>
#include <string>

namespace uhoi {

inline constexpr double kDefaultIouThreshold = 0.5;

// Axis-aligned box in corner format, pixel coordinates. Construction
// enforces finite, non-negative coordinates and strictly positive extent, so
// every operation below can assume a non-zero area.
class BoundingBox {
 public:
  BoundingBox(double x_min, double y_min, double x_max, double y_max);

  static BoundingBox from_array(const std::array<double, 4>& xyxy) {
    return {xyxy[0], xyxy[1], xyxy[2], xyxy[3]};
  }

  double x_min() const { return x_min_; }
  double y_min() const { return y_min_; }
  double x_max() const { return x_max_; }
  double y_max() const { return y_max_; }

  double width() const { return x_max_ - x_min_; }
  double height() const { return y_max_ - y_min_; }
  double area() const { return width() * height(); }

  bool contains(const BoundingBox& other) const;
  bool within(double image_width, double image_height) const;

  std::array<double, 4> to_array() const { return {x_min_, y_min_, x_max_, y_max_}; }
  std::string to_string() const;

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;

 private:
  double x_min_;
  double y_min_;
  double x_max_;
  double y_max_;
};

// Smallest box enclosing a human and an object box; the region handed to
// the visual prompt renderer.
struct UnionRegion {
  BoundingBox box;
};

// Intersection over union in [0, 1]; 0 when the boxes are disjoint or only
// touch along an edge.
double iou(const BoundingBox& a, const BoundingBox& b);

UnionRegion union_box(const BoundingBox& a, const BoundingBox& b);

struct BoxPair {
  BoundingBox human;
  BoundingBox object;
};

// Both the human IoU and the object IoU must reach the threshold (inclusive).
bool spatial_match(const BoxPair& predicted, const BoxPair& ground_truth,
                   double iou_threshold = kDefaultIouThreshold);

// min(human IoU, object IoU): the overlap a pair match is ranked by.
double pair_overlap(const BoxPair& predicted, const BoxPair& ground_truth);

}  // namespace uhoi
