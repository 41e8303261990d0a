// SPDX-License-Identifier: Apache-2.0
#include "editaudit/geometry/mask.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace editaudit::geometry {

std::optional<BoundingBox> clamp(const BoundingBox& box, int width, int height) {
  const int x0 = std::max(box.x, 0);
  const int y0 = std::max(box.y, 0);
  const int x1 = std::min(box.right(), width);
  const int y1 = std::min(box.bottom(), height);
  if (x1 <= x0 || y1 <= y0) return std::nullopt;
  return BoundingBox{x0, y0, x1 - x0, y1 - y0};
}

BinaryMask::BinaryMask(int width, int height)
    : BinaryMask(width, height,
                 std::vector<std::uint8_t>(static_cast<std::size_t>(std::max(width, 0)) *
                                           static_cast<std::size_t>(std::max(height, 0)))) {}

BinaryMask::BinaryMask(int width, int height, std::vector<std::uint8_t> bits)
    : width_(width), height_(height), bits_(std::move(bits)) {
  if (width < 0 || height < 0 || (width == 0 && height == 0))
    throw GeometryError("mask needs a positive dimension");
  if (bits_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
    throw GeometryError("mask bit count does not match " + std::to_string(width) + "x" +
                        std::to_string(height));
  for (auto& b : bits_) b = b ? 1 : 0;
}

void BinaryMask::fill(const BoundingBox& box, bool on) {
  auto c = clamp(box, width_, height_);
  if (!c) return;
  for (int y = c->y; y < c->bottom(); ++y)
    std::fill_n(bits_.begin() + static_cast<std::ptrdiff_t>(index(c->x, y)), c->w, on ? 1 : 0);
}

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

std::optional<BoundingBox> BinaryMask::foreground_box() const {
  int x0 = width_, y0 = height_, x1 = -1, y1 = -1;
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) {
      if (!at(x, y)) continue;
      x0 = std::min(x0, x);
      y0 = std::min(y0, y);
      x1 = std::max(x1, x);
      y1 = std::max(y1, y);
    }
  }
  if (x1 < 0) return std::nullopt;
  return BoundingBox{x0, y0, x1 - x0 + 1, y1 - y0 + 1};
}

BinaryMask mask_from_image(const Image& gray) {
  if (gray.channels != 1) throw GeometryError("mask image must be single-channel");
  std::vector<std::uint8_t> bits(gray.pixels.size());
  std::transform(gray.pixels.begin(), gray.pixels.end(), bits.begin(),
                 [](std::uint8_t v) { return v > 127 ? 1 : 0; });
  return BinaryMask(gray.width, gray.height, std::move(bits));
}

BinaryMask read_mask(const std::filesystem::path& path) { return mask_from_image(read_gray(path)); }

void write_mask(const BinaryMask& mask, const std::filesystem::path& path) {
  Image img{mask.width(), mask.height(), 1, {}};
  img.pixels.reserve(mask.bits().size());
  for (auto b : mask.bits()) img.pixels.push_back(b ? 255 : 0);
  write_png(img, path);
}

BinaryMask decode_rle(std::span<const long long> counts, int width, int height) {
  const long long total = static_cast<long long>(width) * height;
  std::vector<std::uint8_t> bits;
  bits.reserve(static_cast<std::size_t>(std::max(total, 0LL)));
  bool on = false;
  for (long long c : counts) {
    if (c < 0) throw GeometryError("negative run length in RLE");
    if (static_cast<long long>(bits.size()) + c > total)
      throw GeometryError("RLE runs exceed " + std::to_string(width) + "x" + std::to_string(height));
    bits.insert(bits.end(), static_cast<std::size_t>(c), on ? 1 : 0);
    on = !on;
  }
  if (static_cast<long long>(bits.size()) != total)
    throw GeometryError("RLE covers " + std::to_string(bits.size()) + " pixels, expected " +
                        std::to_string(total));
  return BinaryMask(width, height, std::move(bits));
}

std::vector<long long> encode_rle(const BinaryMask& mask) {
  std::vector<long long> counts;
  std::uint8_t current = 0;
  long long run = 0;
  for (auto b : mask.bits()) {
    if (b != current) {
      counts.push_back(run);
      run = 0;
      current = b;
    }
    ++run;
  }
  counts.push_back(run);
  return counts;
}

}  // namespace editaudit::geometry
