// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "editaudit/core/types.hpp"
#include "editaudit/geometry/ops.hpp"
#include "editaudit/lexicon/lexicon.hpp"
#include "editaudit/providers/provider.hpp"

namespace editaudit::pipeline {

class PipelineError : public Error {
 public:
  using Error::Error;
};

enum class Region { Tight, Padded, Full };
/// Tie-break order: tight first.
inline constexpr std::array<Region, 3> kRegionOrder = {Region::Tight, Region::Padded, Region::Full};
std::string_view to_string(Region r);
Region parse_region(std::string_view text);

struct ImageDescriptions {
  std::optional<std::string> tight;
  std::optional<std::string> padded;
  std::string full;

  const std::optional<std::string>* find(Region r) const;
  /// Present regions in tie-break order.
  std::vector<Region> available() const;
  const std::string& text(Region r) const;
};

struct RegionDescriptions {
  ImageDescriptions source;
  ImageDescriptions edited;
  /// Crops on the source image when a single mask box was found.
  std::optional<geometry::ZoomCrops> crops;
};

/// Describes tight, padded and full views of both images when the mask has
/// exactly one component, otherwise only the full images.
RegionDescriptions gather_descriptions(const EditRecord& edit, providers::Provider& provider);

/// Regions of one image ranked for grounding; front() is the choice.
///
/// Regions are ordered by noun overlap with the instruction, ties in
/// tie-break order. When no region overlaps, regions that share a noun with
/// another region come first, then full, then the rest.
std::vector<Region> select_grounded(std::string_view instruction, const ImageDescriptions& descs,
                                    const lexicon::NounLexicon& lex);

struct PipelineMetadata {
  std::string edit_id;
  ActionType action = ActionType::Add;
  std::string short_caption;
  std::string extensive_caption;
  std::string revised_instruction;
  std::string source_object;  // empty for none
  std::string target_object;  // empty for none
  std::string explanation;
  Region grounding_source = Region::Full;
  Region grounding_edited = Region::Full;
  int retries = 0;
};

/// Parses the labelled-line reply. nullopt for a missing field, an empty
/// short caption, or an action that is not one of the four types.
std::optional<PipelineMetadata> parse_metadata_reply(std::string_view reply);

/// Tries ranked region pairs in order until a reply parses. Attempt k uses
/// the k-th ranked region of each image. Throws PipelineError when every
/// attempt fails.
PipelineMetadata generate_metadata(const EditRecord& edit, const RegionDescriptions& descs,
                                   std::span<const Region> source_rank,
                                   std::span<const Region> edited_rank,
                                   providers::Provider& provider);

PipelineMetadata run_pipeline(const EditRecord& edit, providers::Provider& provider,
                              const lexicon::NounLexicon& lex);

nlohmann::json to_json(const PipelineMetadata& m);
PipelineMetadata metadata_from_json(const nlohmann::json& j);

struct Distribution {
  std::map<ActionType, std::size_t> counts;
  std::size_t total = 0;
  double percent(ActionType a) const;
};
Distribution distribution(std::span<const PipelineMetadata> runs);

}  // namespace editaudit::pipeline
