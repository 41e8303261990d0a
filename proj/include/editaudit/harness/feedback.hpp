// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <set>
#include <span>
#include <string_view>
#include <vector>

namespace editaudit::harness {

enum class FeedbackCategory {
  ShapeProportion,
  BlurFuzziness,
  Texture,
  LightingBrightness,
  Color,
  UnrealArtificial,
  Placement,
  MissingExtra,
  Edges,
  Resolution,
};

inline constexpr std::array<FeedbackCategory, 10> kAllFeedbackCategories = {
    FeedbackCategory::ShapeProportion, FeedbackCategory::BlurFuzziness,
    FeedbackCategory::Texture,         FeedbackCategory::LightingBrightness,
    FeedbackCategory::Color,           FeedbackCategory::UnrealArtificial,
    FeedbackCategory::Placement,       FeedbackCategory::MissingExtra,
    FeedbackCategory::Edges,           FeedbackCategory::Resolution};

/// e.g. "Shape/Proportion", "Unreal/Artificial Look".
std::string_view to_string(FeedbackCategory c);
std::span<const std::string_view> keywords(FeedbackCategory c);

/// Categories with at least one keyword occurring as whole words,
/// case-insensitively. Multi-word keywords match across any whitespace.
std::set<FeedbackCategory> categorize_feedback(std::string_view text);

}  // namespace editaudit::harness
