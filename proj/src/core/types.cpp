// SPDX-License-Identifier: Apache-2.0
#include "editaudit/core/types.hpp"

#include <algorithm>
#include <cctype>
#include <utility>

#include "editaudit/core/text.hpp"

namespace editaudit {

std::string_view to_string(ActionType a) {
  switch (a) {
    case ActionType::Add: return "Add";
    case ActionType::Remove: return "Remove";
    case ActionType::Replace: return "Replace";
    case ActionType::ChangeAttribute: return "Change Attribute";
  }
  return "?";
}

std::optional<ActionType> try_parse_action(std::string_view text) {
  std::string key;
  for (char c : text::to_lower(text::trim(text)))
    if (c != ' ' && c != '_' && c != '-') key.push_back(c);
  while (!key.empty() && (key.back() == '.' || key.back() == ',')) key.pop_back();

  struct Form {
    std::string_view word;
    ActionType action;
  };
  static constexpr Form kForms[] = {
      {"add", ActionType::Add},          {"added", ActionType::Add},
      {"adds", ActionType::Add},         {"addition", ActionType::Add},
      {"remove", ActionType::Remove},    {"removed", ActionType::Remove},
      {"removes", ActionType::Remove},   {"removal", ActionType::Remove},
      {"delete", ActionType::Remove},    {"deleted", ActionType::Remove},
      {"deletes", ActionType::Remove},   {"replace", ActionType::Replace},
      {"replaced", ActionType::Replace}, {"replaces", ActionType::Replace},
      {"replacement", ActionType::Replace}, {"swap", ActionType::Replace},
      {"swapped", ActionType::Replace},  {"swaps", ActionType::Replace},
      {"changeattribute", ActionType::ChangeAttribute},
      {"change", ActionType::ChangeAttribute},
      {"changed", ActionType::ChangeAttribute},
      {"changes", ActionType::ChangeAttribute},
      {"modify", ActionType::ChangeAttribute},
      {"modified", ActionType::ChangeAttribute},
      {"modifies", ActionType::ChangeAttribute},
      {"alter", ActionType::ChangeAttribute},
      {"altered", ActionType::ChangeAttribute},
      {"alters", ActionType::ChangeAttribute},
  };
  for (const auto& f : kForms)
    if (key == f.word) return f.action;
  return std::nullopt;
}

ActionType parse_action(std::string_view text) {
  if (auto a = try_parse_action(text)) return *a;
  throw ParseError("unknown action type: '" + std::string(text) + "'");
}

DifferenceTriplet::DifferenceTriplet(std::optional<std::string> source,
                                     std::optional<std::string> target, ActionType action)
    : source_(std::move(source)), target_(std::move(target)), action_(action) {
  auto blank = [](const std::optional<std::string>& s) {
    return s.has_value() && text::trim(*s).empty();
  };
  if (blank(source_) || blank(target_))
    throw InvariantError("triplet objects must be absent or non-empty");
  switch (action_) {
    case ActionType::Add:
      if (source_ || !target_) throw InvariantError("Add triplet needs a target and no source");
      break;
    case ActionType::Remove:
      if (!source_ || target_) throw InvariantError("Remove triplet needs a source and no target");
      break;
    case ActionType::Replace:
    case ActionType::ChangeAttribute:
      if (!source_ || !target_)
        throw InvariantError(std::string(to_string(action_)) + " triplet needs source and target");
      break;
  }
}

DifferenceTriplet DifferenceTriplet::add(std::string target) {
  return {std::nullopt, std::move(target), ActionType::Add};
}
DifferenceTriplet DifferenceTriplet::remove(std::string source) {
  return {std::move(source), std::nullopt, ActionType::Remove};
}
DifferenceTriplet DifferenceTriplet::replace(std::string source, std::string target) {
  return {std::move(source), std::move(target), ActionType::Replace};
}
DifferenceTriplet DifferenceTriplet::change(std::string source, std::string target) {
  return {std::move(source), std::move(target), ActionType::ChangeAttribute};
}

std::string to_string(const DifferenceTriplet& t) {
  return "(" + t.source().value_or("None") + ", " + t.target().value_or("None") + ", " +
         std::string(to_string(t.action())) + ")";
}

std::string_view to_string(AccuracyLevel a) {
  switch (a) {
    case AccuracyLevel::Accurate: return "Accurate";
    case AccuracyLevel::AccurateButUnexpected: return "Accurate, But Unexpected";
    case AccuracyLevel::InaccurateReflects: return "Inaccurate, Reflects Instruction";
    case AccuracyLevel::Inaccurate: return "Inaccurate";
  }
  return "?";
}

std::string_view to_string(ArtifactLevel a) {
  switch (a) {
    case ArtifactLevel::Significant: return "Significant";
    case ArtifactLevel::Mild: return "Mild";
    case ArtifactLevel::NoArtifact: return "No Artifact";
  }
  return "?";
}

namespace {

std::string squash(std::string_view s) {
  std::string out;
  for (char c : text::to_lower(s))
    if (std::isalpha(static_cast<unsigned char>(c))) out.push_back(c);
  return out;
}

}  // namespace

AccuracyLevel parse_accuracy_level(std::string_view text) {
  const auto key = squash(text);
  for (auto a : kAllAccuracyLevels)
    if (key == squash(to_string(a))) return a;
  if (key == "accuratebutunexpected" || key == "accurateunexpected")
    return AccuracyLevel::AccurateButUnexpected;
  if (key == "inaccuratereflects") return AccuracyLevel::InaccurateReflects;
  throw ParseError("unknown accuracy level: '" + std::string(text) + "'");
}

ArtifactLevel parse_artifact_level(std::string_view text) {
  const auto key = squash(text);
  for (auto a : kAllArtifactLevels)
    if (key == squash(to_string(a))) return a;
  if (key == "none" || key == "noartifacts") return ArtifactLevel::NoArtifact;
  throw ParseError("unknown artifact level: '" + std::string(text) + "'");
}

const EditRecord* EditSet::find(std::string_view id) const {
  auto it = std::find_if(records.begin(), records.end(), [&](const auto& r) { return r.id == id; });
  return it == records.end() ? nullptr : &*it;
}

}  // namespace editaudit
