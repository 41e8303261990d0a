// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "editaudit/core/types.hpp"
#include "editaudit/lexicon/lexicon.hpp"
#include "editaudit/pipeline/pipeline.hpp"
#include "editaudit/providers/provider.hpp"

namespace editaudit::augment {

class AugmentError : public Error {
 public:
  using Error::Error;
};

enum class Label { Positive, Negative };
enum class Lineage { Original, Reversed, Negative, ReversedNegative };
std::string_view to_string(Label l);
std::string_view to_string(Lineage l);

struct TrainingInstance {
  std::string id;
  std::string edit_id;
  std::filesystem::path first_image;   // shown as "before"
  std::filesystem::path second_image;  // shown as "after"
  std::string instruction;
  std::string difference_caption;
  ActionType action = ActionType::Add;
  std::string source_object;  // empty for none
  std::string target_object;  // empty for none
  Label label = Label::Positive;
  Lineage lineage = Lineage::Original;
  /// For negatives: the object the real edit touched.
  std::string true_object;
  friend bool operator==(const TrainingInstance&, const TrainingInstance&) = default;
};

/// Positive instance from an edit and its pipeline metadata.
TrainingInstance make_original(const EditRecord& edit, const pipeline::PipelineMetadata& meta);

/// Swaps the images and the action direction (Add and Remove trade places,
/// Replace and Change Attribute swap their objects), then rewrites the
/// instruction and caption with the few-shot prompt.
TrainingInstance reverse_edit(const TrainingInstance& inst, providers::Provider& provider);

struct SceneObject {
  std::string label;
  long long area = 0;  // bbox area in pixels
};

struct NegativeContext {
  std::vector<SceneObject> scene;
  /// Bbox area of the edited object; required for Remove.
  std::optional<long long> object_area;
};

/// Deceptive counterpart of an instance, labelled negative.
///
/// Remove: a scene object of a different kind whose area is within 50% of
/// the edited object's. Add/Replace: the first provider suggestion that is
/// neither similar to the true object nor present in the scene. Change
/// Attribute: the colour or material word swapped for one not in the edit.
TrainingInstance negative_edit(const TrainingInstance& inst, const NegativeContext& ctx,
                               providers::Provider& provider, const lexicon::NounLexicon& lex);

struct Failure {
  std::string edit_id;
  Lineage lineage;
  std::string reason;
};

struct ExpandResult {
  /// Originals, then reversed, then negatives, then reversed negatives;
  /// each bucket in input order.
  std::vector<TrainingInstance> instances;
  std::vector<Failure> failures;
  std::size_t count(Lineage l) const;
};

ExpandResult expand(std::span<const TrainingInstance> originals,
                    const std::map<std::string, NegativeContext>& contexts,
                    providers::Provider& provider, const lexicon::NounLexicon& lex);

/// Line-delimited, paths relative to the manifest's directory.
void write_training_manifest(std::span<const TrainingInstance> instances,
                             const std::filesystem::path& path);
std::vector<TrainingInstance> load_training_manifest(const std::filesystem::path& path);

}  // namespace editaudit::augment
