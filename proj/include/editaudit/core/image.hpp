// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "editaudit/core/error.hpp"

namespace editaudit {

class ImageError : public Error {
 public:
  using Error::Error;
};

/// Decoded 8-bit raster, row-major, interleaved channels (1 = gray, 3 = RGB).
struct Image {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<std::uint8_t> pixels;

  std::uint8_t at(int x, int y, int c = 0) const {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
};

struct Dimensions {
  int width = 0;
  int height = 0;
  friend bool operator==(const Dimensions&, const Dimensions&) = default;
};

/// Reads PNG or JPEG as RGB. Throws ImageError when the file is missing or
/// cannot be decoded.
Image read_image(const std::filesystem::path& path);
/// Reads as single channel (colour input is converted to gray).
Image read_gray(const std::filesystem::path& path);
Dimensions image_dimensions(const std::filesystem::path& path);

void write_png(const Image& image, const std::filesystem::path& path);
std::vector<std::uint8_t> encode_png(const Image& image);

/// Sub-rectangle copy. The rectangle must lie inside the image.
Image crop(const Image& image, int x, int y, int w, int h);

/// Content hash over dimensions and raw pixels, independent of the file
/// encoding the pixels came from.
std::string image_digest(const Image& image);

}  // namespace editaudit
