#include "uhoi/pairing.hpp"

#include <algorithm>
#include <cmath>

#include <opencv2/imgproc.hpp>

#include "uhoi/error.hpp"

namespace uhoi {

namespace {

int round_half_up(double v) { return static_cast<int>(std::floor(v + 0.5)); }

cv::Mat wrap(RgbImage& image) {
  return cv::Mat(image.height, image.width, CV_8UC3, image.pixels.data());
}

cv::Mat wrap(const RgbImage& image) {
  return cv::Mat(image.height, image.width, CV_8UC3,
                 const_cast<std::uint8_t*>(image.pixels.data()));
}

cv::Rect to_cv(const PixelRect& r) { return {r.x0, r.y0, r.width(), r.height()}; }

RgbImage crop(const RgbImage& image, const PixelRect& r) {
  RgbImage out(r.width(), r.height());
  wrap(image)(to_cv(r)).copyTo(wrap(out));
  return out;
}

double diagonal(const RgbImage& image) {
  return std::hypot(static_cast<double>(image.width), static_cast<double>(image.height));
}

}  // namespace

std::string make_pair_id(std::string_view image_id, std::size_t human_index,
                         std::size_t object_index) {
  return std::string(image_id) + ":h" + std::to_string(human_index) + "-o" +
         std::to_string(object_index);
}

std::vector<HumanObjectPair> build_pairs(std::string_view image_id,
                                         const std::vector<Detection>& detections,
                                         const PairingOptions& options) {
  std::vector<HumanObjectPair> pairs;
  for (std::size_t h = 0; h < detections.size(); ++h) {
    if (!options.humans.contains(detections[h].label)) continue;
    for (std::size_t o = 0; o < detections.size(); ++o) {
      if (o == h) continue;
      if (!options.include_human_human && options.humans.contains(detections[o].label)) {
        continue;
      }
      pairs.push_back({make_pair_id(image_id, h, o), std::string(image_id), h, o,
                       detections[h], detections[o]});
    }
  }
  return pairs;
}

std::string to_string(VisualMode mode) {
  switch (mode) {
    case VisualMode::kCrop: return "crop";
    case VisualMode::kRedCircle: return "red_circle";
    case VisualMode::kReverseBlur: return "reverse_blur";
    case VisualMode::kCropMask: return "crop_mask";
    case VisualMode::kBlind: return "blind";
  }
  return "crop";
}

VisualMode parse_visual_mode(std::string_view name) {
  for (auto mode : {VisualMode::kCrop, VisualMode::kRedCircle, VisualMode::kReverseBlur,
                    VisualMode::kCropMask, VisualMode::kBlind}) {
    if (name == to_string(mode)) return mode;
  }
  throw ConfigError("unknown visual mode '" + std::string(name) +
                    "' (crop|red_circle|reverse_blur|crop_mask|blind)");
}

PixelRect to_pixel_rect(const BoundingBox& box, int image_width, int image_height) {
  PixelRect r{std::clamp(round_half_up(box.x_min()), 0, image_width),
              std::clamp(round_half_up(box.y_min()), 0, image_height),
              std::clamp(round_half_up(box.x_max()), 0, image_width),
              std::clamp(round_half_up(box.y_max()), 0, image_height)};
  if (r.width() <= 0 || r.height() <= 0) {
    throw ValidationError("box " + box.to_string() + " is degenerate on a " +
                          std::to_string(image_width) + "x" + std::to_string(image_height) +
                          " pixel grid");
  }
  return r;
}

VisualPrompt render_visual_prompt(const RgbImage& image, const HumanObjectPair& pair,
                                  VisualMode mode) {
  if (image.empty()) throw ImageError("cannot render a prompt from an empty image");
  const UnionRegion region = pair.region();
  const PixelRect u = to_pixel_rect(region.box, image.width, image.height);

  switch (mode) {
    case VisualMode::kCrop:
      return {mode, crop(image, u), region};

    case VisualMode::kBlind:
      return {mode, RgbImage(u.width(), u.height(), 0), region};

    case VisualMode::kCropMask: {
      const PixelRect h = to_pixel_rect(pair.human.box, image.width, image.height);
      const PixelRect o = to_pixel_rect(pair.object.box, image.width, image.height);
      RgbImage out(u.width(), u.height(), 0);
      cv::Mat src = wrap(image);
      cv::Mat dst = wrap(out);
      for (const PixelRect& r : {h, o}) {
        const cv::Rect local(r.x0 - u.x0, r.y0 - u.y0, r.width(), r.height());
        src(to_cv(r)).copyTo(dst(local));
      }
      return {mode, std::move(out), region};
    }

    case VisualMode::kRedCircle: {
      RgbImage out = image;
      const int stroke = std::max(2, round_half_up(0.005 * diagonal(image)));
      const cv::RotatedRect ellipse(
          cv::Point2f(static_cast<float>(u.x0 + u.width() / 2.0),
                      static_cast<float>(u.y0 + u.height() / 2.0)),
          cv::Size2f(static_cast<float>(u.width()), static_cast<float>(u.height())), 0.0f);
      cv::Mat dst = wrap(out);
      cv::ellipse(dst, ellipse, cv::Scalar(255, 0, 0), stroke, cv::LINE_8);
      return {mode, std::move(out), region};
    }

    case VisualMode::kReverseBlur: {
      const PixelRect h = to_pixel_rect(pair.human.box, image.width, image.height);
      const PixelRect o = to_pixel_rect(pair.object.box, image.width, image.height);
      RgbImage out(image.width, image.height);
      const double sigma = 0.02 * diagonal(image);
      cv::Mat src = wrap(image);
      cv::Mat dst = wrap(out);
      cv::GaussianBlur(src, dst, cv::Size(0, 0), sigma, sigma, cv::BORDER_REFLECT_101);
      for (const PixelRect& r : {h, o}) src(to_cv(r)).copyTo(dst(to_cv(r)));
      return {mode, std::move(out), region};
    }
  }
  throw ConfigError("unhandled visual mode");
}

}  // namespace uhoi
