// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "editaudit/core/error.hpp"
#include "editaudit/core/image.hpp"

namespace editaudit::geometry {

class GeometryError : public Error {
 public:
  using Error::Error;
};

/// Axis-aligned pixel rectangle [x, x+w) x [y, y+h).
struct BoundingBox {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  long long area() const { return static_cast<long long>(w) * h; }
  int right() const { return x + w; }   // exclusive
  int bottom() const { return y + h; }  // exclusive
  bool valid() const { return w > 0 && h > 0; }
  bool contains(const BoundingBox& inner) const {
    return inner.x >= x && inner.y >= y && inner.right() <= right() && inner.bottom() <= bottom();
  }
  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// Intersection with [0,width) x [0,height); nullopt when nothing is left.
std::optional<BoundingBox> clamp(const BoundingBox& box, int width, int height);

/// Row-major binary raster, one byte (0/1) per pixel.
class BinaryMask {
 public:
  BinaryMask(int width, int height);
  BinaryMask(int width, int height, std::vector<std::uint8_t> bits);

  int width() const { return width_; }
  int height() const { return height_; }
  Dimensions dimensions() const { return {width_, height_}; }

  bool at(int x, int y) const { return bits_[index(x, y)] != 0; }
  void set(int x, int y, bool on = true) { bits_[index(x, y)] = on ? 1 : 0; }
  void fill(const BoundingBox& box, bool on = true);

  std::size_t count() const;
  bool empty() const { return count() == 0; }
  std::span<const std::uint8_t> bits() const { return bits_; }

  /// Tight box around the foreground; nullopt for an all-zero mask.
  std::optional<BoundingBox> foreground_box() const;

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width_ + x; }

  int width_;
  int height_;
  std::vector<std::uint8_t> bits_;
};

/// Loads a mask image (colour input is converted to gray) and binarizes at > 127.
BinaryMask read_mask(const std::filesystem::path& path);
void write_mask(const BinaryMask& mask, const std::filesystem::path& path);
BinaryMask mask_from_image(const Image& gray);

/// Uncompressed run-length counts, row-major, first run is background.
BinaryMask decode_rle(std::span<const long long> counts, int width, int height);
std::vector<long long> encode_rle(const BinaryMask& mask);

}  // namespace editaudit::geometry
