// SPDX-License-Identifier: Apache-2.0
#include "editaudit/harness/feedback.hpp"

#include <cctype>
#include <string>

#include "editaudit/core/text.hpp"

namespace editaudit::harness {

namespace {

struct Entry {
  std::string_view name;
  std::vector<std::string_view> words;
};

const std::array<Entry, 10>& table() {
  static const std::array<Entry, 10> kTable = {{
      {"Shape/Proportion", {"shape", "proportion", "size", "distorted", "too big", "too small"}},
      {"Blur/Fuzziness", {"blurry", "fuzzy", "smudged", "blurred edges", "not clear"}},
      {"Texture", {"texture", "smooth", "grainy", "patchy", "unnatural"}},
      {"Lighting/Brightness",
       {"shadows", "lighting", "brightness", "overexposed", "underexposed"}},
      {"Color", {"color", "too bright", "saturated", "unnatural color"}},
      {"Unreal/Artificial Look", {"cartoon", "toy", "artificial", "fake", "graphical"}},
      {"Placement", {"placement", "misaligned", "incorrect angle", "orientation"}},
      {"Missing/Extra Objects", {"missing", "removed", "added", "extra", "inconsistent"}},
      {"Edges", {"edges", "sharp", "uneven", "jagged"}},
      {"Resolution", {"resolution", "clarity", "pixelated", "low quality"}},
  }};
  return kTable;
}

// Tokens split on anything that is not a letter, so "blurred-edges" and
// "blurred  edges" both match "blurred edges".
std::vector<std::string> tokens(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (std::isalpha(static_cast<unsigned char>(c))) {
      cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

bool contains_sequence(const std::vector<std::string>& hay, const std::vector<std::string>& needle) {
  if (needle.empty() || needle.size() > hay.size()) return false;
  for (std::size_t i = 0; i + needle.size() <= hay.size(); ++i) {
    bool all = true;
    for (std::size_t k = 0; k < needle.size() && all; ++k) all = hay[i + k] == needle[k];
    if (all) return true;
  }
  return false;
}

}  // namespace

std::string_view to_string(FeedbackCategory c) { return table()[static_cast<int>(c)].name; }

std::span<const std::string_view> keywords(FeedbackCategory c) {
  return table()[static_cast<int>(c)].words;
}

std::set<FeedbackCategory> categorize_feedback(std::string_view text) {
  std::set<FeedbackCategory> out;
  const auto toks = tokens(text);
  if (toks.empty()) return out;
  for (auto c : kAllFeedbackCategories) {
    for (auto kw : keywords(c)) {
      if (contains_sequence(toks, tokens(kw))) {
        out.insert(c);
        break;
      }
    }
  }
  return out;
}

}  // namespace editaudit::harness
