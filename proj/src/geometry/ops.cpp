// SPDX-License-Identifier: Apache-2.0
#include "editaudit/geometry/ops.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>

namespace editaudit::geometry {

std::vector<BoundingBox> bboxes_from_mask(const BinaryMask& mask) {
  const int w = mask.width();
  const int h = mask.height();
  std::vector<std::uint8_t> seen(static_cast<std::size_t>(w) * h, 0);
  std::vector<BoundingBox> boxes;
  std::deque<std::pair<int, int>> queue;

  for (int sy = 0; sy < h; ++sy) {
    for (int sx = 0; sx < w; ++sx) {
      const std::size_t s = static_cast<std::size_t>(sy) * w + sx;
      if (!mask.at(sx, sy) || seen[s]) continue;
      seen[s] = 1;
      queue.emplace_back(sx, sy);
      int x0 = sx, x1 = sx, y0 = sy, y1 = sy;
      while (!queue.empty()) {
        auto [x, y] = queue.front();
        queue.pop_front();
        x0 = std::min(x0, x);
        x1 = std::max(x1, x);
        y0 = std::min(y0, y);
        y1 = std::max(y1, y);
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = x + dx, ny = y + dy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            const std::size_t n = static_cast<std::size_t>(ny) * w + nx;
            if (seen[n] || !mask.at(nx, ny)) continue;
            seen[n] = 1;
            queue.emplace_back(nx, ny);
          }
        }
      }
      boxes.push_back({x0, y0, x1 - x0 + 1, y1 - y0 + 1});
    }
  }
  std::stable_sort(boxes.begin(), boxes.end(), [](const BoundingBox& a, const BoundingBox& b) {
    if (a.area() != b.area()) return a.area() > b.area();
    if (a.y != b.y) return a.y < b.y;
    return a.x < b.x;
  });
  return boxes;
}

std::size_t overlap_count(const BinaryMask& a, const BinaryMask& b) {
  if (!(a.dimensions() == b.dimensions()))
    throw GeometryError("mask dimensions differ: " + std::to_string(a.width()) + "x" +
                        std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" +
                        std::to_string(b.height()));
  std::size_t n = 0;
  const auto ab = a.bits();
  const auto bb = b.bits();
  for (std::size_t i = 0; i < ab.size(); ++i) n += (ab[i] & bb[i]);
  return n;
}

double intersection_ratio(const BinaryMask& object_mask, const BinaryMask& edit_mask) {
  const std::size_t inter = overlap_count(object_mask, edit_mask);
  const std::size_t total = object_mask.count();
  if (total == 0) return 0.0;
  return static_cast<double>(inter) / static_cast<double>(total);
}

bool bbox_intersects(const BoundingBox& a, const BoundingBox& b) {
  if (!a.valid() || !b.valid()) return false;
  return a.x < b.right() && b.x < a.right() && a.y < b.bottom() && b.y < a.bottom();
}

namespace {

// Grows [start, start+side) about its centre to `target` and clamps to [0, limit).
std::pair<int, int> grow_axis(int start, int side, int target, int limit) {
  if (target <= side) return {start, side};
  const int extra = target - side;
  int lo = start - extra / 2;
  int hi = start + side + (extra - extra / 2);
  lo = std::max(lo, 0);
  hi = std::min(hi, limit);
  return {lo, hi - lo};
}

}  // namespace

ZoomCrops zoom_crops(Dimensions image, const BoundingBox& box) {
  if (image.width <= 0 || image.height <= 0) throw GeometryError("image has no pixels");
  const BoundingBox full{0, 0, image.width, image.height};
  if (!box.valid() || !full.contains(box))
    throw GeometryError("box outside image");

  const int target_w = std::max(2 * box.w, static_cast<int>(std::ceil(0.15 * image.width)));
  const int target_h = std::max(2 * box.h, static_cast<int>(std::ceil(0.15 * image.height)));
  const auto [px, pw] = grow_axis(box.x, box.w, target_w, image.width);
  const auto [py, ph] = grow_axis(box.y, box.h, target_h, image.height);
  return {box, BoundingBox{px, py, pw, ph}, full};
}

BinaryMask resample_mask(const BinaryMask& mask, Dimensions target) {
  if (target.width <= 0 || target.height <= 0)
    throw GeometryError("resample target must have positive dimensions");
  if (mask.dimensions() == target) return mask;
  BinaryMask out(target.width, target.height);
  const long long sw = mask.width(), sh = mask.height();
  for (int y = 0; y < target.height; ++y) {
    // centre-aligned nearest neighbour: src = floor((dst + 0.5) * src_size / dst_size)
    const int sy = static_cast<int>((2LL * y + 1) * sh / (2LL * target.height));
    for (int x = 0; x < target.width; ++x) {
      const int sx = static_cast<int>((2LL * x + 1) * sw / (2LL * target.width));
      if (mask.at(sx, sy)) out.set(x, y);
    }
  }
  return out;
}

BoundingBox scale_box(const BoundingBox& box, Dimensions from, Dimensions to) {
  if (from == to) return box;
  auto lo = [](int v, int f, int t) {
    return static_cast<int>(std::floor(static_cast<double>(v) * t / f));
  };
  auto hi = [](int v, int f, int t) {
    return static_cast<int>(std::ceil(static_cast<double>(v) * t / f));
  };
  const int x0 = lo(box.x, from.width, to.width);
  const int y0 = lo(box.y, from.height, to.height);
  const int x1 = std::max(hi(box.right(), from.width, to.width), x0 + 1);
  const int y1 = std::max(hi(box.bottom(), from.height, to.height), y0 + 1);
  return {x0, y0, x1 - x0, y1 - y0};
}

}  // namespace editaudit::geometry
