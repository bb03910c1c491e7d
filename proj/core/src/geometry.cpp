#include "uhoi/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "uhoi/error.hpp"

namespace uhoi {

BoundingBox::BoundingBox(double x_min, double y_min, double x_max, double y_max)
    : x_min_(x_min), y_min_(y_min), x_max_(x_max), y_max_(y_max) {
  for (double v : {x_min, y_min, x_max, y_max}) {
    if (!std::isfinite(v)) {
      throw ValidationError("bounding box has non-finite coordinate: " + to_string());
    }
    if (v < 0.0) {
      throw ValidationError("bounding box has negative coordinate: " + to_string());
    }
  }
  if (!(x_min < x_max) || !(y_min < y_max)) {
    throw ValidationError("bounding box has zero or negative extent: " + to_string());
  }
}

bool BoundingBox::contains(const BoundingBox& other) const {
  return x_min_ <= other.x_min_ && y_min_ <= other.y_min_ &&
         x_max_ >= other.x_max_ && y_max_ >= other.y_max_;
}

bool BoundingBox::within(double image_width, double image_height) const {
  return x_max_ <= image_width && y_max_ <= image_height;
}

std::string BoundingBox::to_string() const {
  std::ostringstream ss;
  ss << '[' << x_min_ << ',' << y_min_ << ',' << x_max_ << ',' << y_max_ << ']';
  return ss.str();
}

double iou(const BoundingBox& a, const BoundingBox& b) {
  const double iw = std::min(a.x_max(), b.x_max()) - std::max(a.x_min(), b.x_min());
  const double ih = std::min(a.y_max(), b.y_max()) - std::max(a.y_min(), b.y_min());
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

UnionRegion union_box(const BoundingBox& a, const BoundingBox& b) {
  return {BoundingBox(std::min(a.x_min(), b.x_min()), std::min(a.y_min(), b.y_min()),
                      std::max(a.x_max(), b.x_max()), std::max(a.y_max(), b.y_max()))};
}

bool spatial_match(const BoxPair& predicted, const BoxPair& ground_truth,
                   double iou_threshold) {
  return iou(predicted.human, ground_truth.human) >= iou_threshold &&
         iou(predicted.object, ground_truth.object) >= iou_threshold;
}

double pair_overlap(const BoxPair& predicted, const BoxPair& ground_truth) {
  return std::min(iou(predicted.human, ground_truth.human),
                  iou(predicted.object, ground_truth.object));
}

}  // namespace uhoi
