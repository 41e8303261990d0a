// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "editaudit/core/error.hpp"

namespace editaudit {

class ParseError : public Error {
 public:
  using Error::Error;
};

class InvariantError : public Error {
 public:
  using Error::Error;
};

enum class ActionType { Add, Remove, Replace, ChangeAttribute };

inline constexpr std::array<ActionType, 4> kAllActions = {
    ActionType::Add, ActionType::Remove, ActionType::Replace, ActionType::ChangeAttribute};

/// Canonical display name: "Add", "Remove", "Replace", "Change Attribute".
std::string_view to_string(ActionType a);

/// Case-insensitive; accepts canonical names and the surface forms
/// change/modify/alter, delete, swap (plus their -ed/-s forms).
/// Anything else, including "None", throws ParseError.
ActionType parse_action(std::string_view text);
std::optional<ActionType> try_parse_action(std::string_view text);

/// One change between source and edited image. Add carries only a target,
/// Remove only a source, Replace and ChangeAttribute both.
class DifferenceTriplet {
 public:
  /// Throws InvariantError when presence of the objects disagrees with the action.
  DifferenceTriplet(std::optional<std::string> source, std::optional<std::string> target,
                    ActionType action);

  static DifferenceTriplet add(std::string target);
  static DifferenceTriplet remove(std::string source);
  static DifferenceTriplet replace(std::string source, std::string target);
  static DifferenceTriplet change(std::string source, std::string target);

  const std::optional<std::string>& source() const { return source_; }
  const std::optional<std::string>& target() const { return target_; }
  ActionType action() const { return action_; }

  friend bool operator==(const DifferenceTriplet&, const DifferenceTriplet&) = default;

 private:
  std::optional<std::string> source_;
  std::optional<std::string> target_;
  ActionType action_;
};

std::string to_string(const DifferenceTriplet& t);

enum class AccuracyLevel { Accurate, AccurateButUnexpected, InaccurateReflects, Inaccurate };
inline constexpr std::array<AccuracyLevel, 4> kAllAccuracyLevels = {
    AccuracyLevel::Accurate, AccuracyLevel::AccurateButUnexpected,
    AccuracyLevel::InaccurateReflects, AccuracyLevel::Inaccurate};

enum class ArtifactLevel { Significant, Mild, NoArtifact };
inline constexpr std::array<ArtifactLevel, 3> kAllArtifactLevels = {
    ArtifactLevel::Significant, ArtifactLevel::Mild, ArtifactLevel::NoArtifact};

/// Template labels, verbatim: "Accurate", "Accurate, But Unexpected",
/// "Inaccurate, Reflects Instruction", "Inaccurate".
std::string_view to_string(AccuracyLevel a);
std::string_view to_string(ArtifactLevel a);
AccuracyLevel parse_accuracy_level(std::string_view text);
ArtifactLevel parse_artifact_level(std::string_view text);

struct EditRecord {
  std::string id;
  std::filesystem::path source_image;
  std::filesystem::path edited_image;
  std::filesystem::path edit_mask;
  std::string instruction;
  std::string editor_tag;

  friend bool operator==(const EditRecord&, const EditRecord&) = default;
};

struct EditSet {
  std::vector<EditRecord> records;
  std::filesystem::path manifest_path;
  std::string manifest_sha256;

  const EditRecord* find(std::string_view id) const;
};

}  // namespace editaudit
