// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "editaudit/core/types.hpp"
#include "editaudit/geometry/mask.hpp"
#include "editaudit/lexicon/lexicon.hpp"

namespace editaudit::artifacts {

class ExportError : public Error {
 public:
  using Error::Error;
};

struct DetectedObject {
  std::string label;
  double score = 0;
  geometry::BoundingBox bbox;
  geometry::BinaryMask mask{1, 1};
};

/// Detections for one image at a stated resolution.
struct DetectionExport {
  std::string image_id;
  Dimensions resolution;
  std::vector<DetectedObject> objects;
};

/// {"image_id", "resolution": [w,h], "objects": [{"label", "score",
/// "bbox": [x,y,w,h], "mask_rle": [counts...]}]}. Throws ExportError when a
/// field is missing, a score is outside [0,1], or a bbox does not bound its mask.
DetectionExport parse_export(const nlohmann::json& j);
DetectionExport load_export(const std::filesystem::path& path);
nlohmann::json to_json(const DetectionExport& e);

enum class DropScale { Absolute, Relative };
enum class ViewCombiner { All, Any };

struct ArtifactConfig {
  double score_drop_threshold = 0.04;
  double min_intersection = 0.024;
  double max_intersection = 0.97;
  double partial_band_max = 0.40;
  DropScale drop_scale = DropScale::Absolute;
  ViewCombiner combiner = ViewCombiner::All;
};

/// Throws Error unless 0 < min < band_max < max < 1 and threshold >= 0.
void validate(const ArtifactConfig& cfg);
/// Overrides any of the six fields present in `j`.
ArtifactConfig config_from_json(const nlohmann::json& j, ArtifactConfig base = {});
nlohmann::json to_json(const ArtifactConfig& cfg);

enum class Method { ScoreDrop, SecondaryObject };
enum class Presence { Disappeared, Appeared };
std::string_view to_string(Method m);
std::string_view to_string(Presence p);

/// What one resolution saw for a score-drop candidate.
struct ViewEvidence {
  Dimensions resolution;
  double intersection = 0;
  double src_score = 0;
  double tgt_score = 0;  // 0 when no counterpart was found
  std::optional<std::size_t> counterpart;  // index in the edited export
  bool dropped = false;
};

struct ArtifactFinding {
  Method method = Method::ScoreDrop;
  std::string class_label;
  std::size_t object_index = 0;  // in the export where the object is present
  std::optional<double> src_score;
  std::optional<double> tgt_score;
  std::optional<Presence> presence;
  int resolutions_confirmed = 0;
  std::vector<ViewEvidence> views;
};

/// Partially covered source objects whose confidence falls after the edit.
///
/// Every distinct export resolution is a view. At a view the edit mask and
/// the other export's masks and boxes are resampled to it. A source object
/// is a candidate when its intersection with the edit mask lies strictly
/// inside (min_intersection, partial_band_max) and does not exceed
/// max_intersection. Its counterpart is a same-label edited object whose
/// box intersects and whose mask overlaps; pairs are assigned greedily by
/// overlap. Without a counterpart the edited score counts as 0.
std::vector<ArtifactFinding> detect_score_drop(const DetectionExport& src,
                                               const DetectionExport& tgt,
                                               const geometry::BinaryMask& edit_mask,
                                               const ArtifactConfig& cfg = {});

/// Main-object boxes per export, each in that export's resolution.
struct MainBoxes {
  std::vector<geometry::BoundingBox> src;
  std::vector<geometry::BoundingBox> tgt;
};

/// Boxes of detections whose label is lexically similar to `main_object`.
std::vector<geometry::BoundingBox> main_object_boxes(const DetectionExport& e,
                                                     std::string_view main_object,
                                                     const lexicon::NounLexicon& lex);

/// Whole secondary objects that vanish (Remove) or appear (Add) inside the
/// edit mask away from the main object. Throws Error for Replace and
/// ChangeAttribute.
std::vector<ArtifactFinding> detect_secondary_changes(const DetectionExport& src,
                                                      const DetectionExport& tgt,
                                                      const geometry::BinaryMask& edit_mask,
                                                      const MainBoxes& main_boxes,
                                                      std::string_view main_object,
                                                      ActionType action,
                                                      const lexicon::NounLexicon& lex);

inline bool artifact_verdict(const std::vector<ArtifactFinding>& findings) {
  return !findings.empty();
}

nlohmann::json to_json(const ArtifactFinding& f);

}  // namespace editaudit::artifacts
