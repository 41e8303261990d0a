// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "editaudit/geometry/mask.hpp"

namespace editaudit::geometry {

/// One box per 8-connected foreground component, largest box area first
/// (ties by top-left corner, row-major).
std::vector<BoundingBox> bboxes_from_mask(const BinaryMask& mask);

/// |object & edit| / |object|; 0 for an empty object. Throws GeometryError
/// on dimension mismatch.
double intersection_ratio(const BinaryMask& object_mask, const BinaryMask& edit_mask);

/// Number of pixels set in both masks. Dimensions must match.
std::size_t overlap_count(const BinaryMask& a, const BinaryMask& b);

/// True iff the boxes share at least one pixel.
bool bbox_intersects(const BoundingBox& a, const BoundingBox& b);

struct ZoomCrops {
  BoundingBox tight;
  BoundingBox padded;
  BoundingBox full;
};

/// tight = box; padded grows each axis about the box centre to
/// max(2*side, ceil(0.15*image side)) and is clamped; full = whole image.
/// Throws GeometryError when the box is invalid or not inside the image.
ZoomCrops zoom_crops(Dimensions image, const BoundingBox& box);

/// Nearest-neighbour resampling; identity when dimensions already match.
BinaryMask resample_mask(const BinaryMask& mask, Dimensions target);

/// Maps a box between resolutions, keeping every covered pixel covered.
BoundingBox scale_box(const BoundingBox& box, Dimensions from, Dimensions to);

}  // namespace editaudit::geometry
