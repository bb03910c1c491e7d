#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "uhoi/datamodel.hpp"
#include "uhoi/geometry.hpp"
#include "uhoi/image.hpp"

namespace uhoi {

struct HumanObjectPair {
  std::string pair_id;  // "<image_id>:h<human index>-o<object index>"
  std::string image_id;
  std::size_t human_index = 0;
  std::size_t object_index = 0;
  Detection human;
  Detection object;

  UnionRegion region() const { return union_box(human.box, object.box); }
};

struct PairingOptions {
  HumanLexicon humans;
  bool include_human_human = true;
};

std::string make_pair_id(std::string_view image_id, std::size_t human_index,
                         std::size_t object_index);

// Every human detection paired with every other detection (humans included
// unless disabled), ordered by (human index, object index).
std::vector<HumanObjectPair> build_pairs(std::string_view image_id,
                                         const std::vector<Detection>& detections,
                                         const PairingOptions& options = {});

enum class VisualMode { kCrop, kRedCircle, kReverseBlur, kCropMask, kBlind };

std::string to_string(VisualMode mode);
VisualMode parse_visual_mode(std::string_view name);

// Integer pixel rectangle [x0, x1) x [y0, y1).
struct PixelRect {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;

  int width() const { return x1 - x0; }
  int height() const { return y1 - y0; }
  friend bool operator==(const PixelRect&, const PixelRect&) = default;
};

// Round half-up to the pixel grid and clamp to the image. Throws
// ValidationError if the result is empty.
PixelRect to_pixel_rect(const BoundingBox& box, int image_width, int image_height);

struct VisualPrompt {
  VisualMode mode;
  RgbImage image;
  UnionRegion region;
};

// crop:         union-box subimage
// red_circle:   full image, red ellipse inscribed in the union box
// reverse_blur: full image blurred outside the two boxes
// crop_mask:    union-box subimage, pixels outside both boxes zeroed
// blind:        black image of the crop's size
VisualPrompt render_visual_prompt(const RgbImage& image, const HumanObjectPair& pair,
                                  VisualMode mode);

}  // namespace uhoi
