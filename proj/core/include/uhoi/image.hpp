#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace uhoi {

// 8-bit RGB raster, row-major, tightly packed.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  RgbImage() = default;
  RgbImage(int w, int h, std::uint8_t fill = 0);

  std::uint8_t* at(int x, int y) { return pixels.data() + (static_cast<std::size_t>(y) * width + x) * 3; }
  const std::uint8_t* at(int x, int y) const {
    return pixels.data() + (static_cast<std::size_t>(y) * width + x) * 3;
  }
  bool empty() const { return width <= 0 || height <= 0; }

  friend bool operator==(const RgbImage&, const RgbImage&) = default;
};

// PNG or JPEG bytes to RGB. Throws ImageError on decode failure.
RgbImage decode_image(std::span<const std::uint8_t> bytes);
RgbImage load_image(const std::string& path);

// Lossless PNG with fixed compression settings (byte-stable output).
std::vector<std::uint8_t> encode_png(const RgbImage& image);
void save_png(const RgbImage& image, const std::string& path);

std::string base64_encode(std::span<const std::uint8_t> bytes);

}  // namespace uhoi
