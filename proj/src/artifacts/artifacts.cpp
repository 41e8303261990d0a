// SPDX-License-Identifier: Apache-2.0
#include "editaudit/artifacts/artifacts.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <tuple>

#include "editaudit/geometry/ops.hpp"

namespace editaudit::artifacts {

namespace fs = std::filesystem;
using geometry::BinaryMask;
using geometry::BoundingBox;
using nlohmann::json;

namespace {

// Scores are compared with a small slack so that 0.80 -> 0.76 is not a drop
// of "more than" 0.04 because of binary rounding.
constexpr double kScoreEps = 1e-9;

}  // namespace

DetectionExport parse_export(const json& j) {
  DetectionExport e;
  try {
    e.image_id = j.at("image_id").get<std::string>();
    if (!j.contains("resolution")) throw ExportError("export '" + e.image_id + "': no resolution");
    const auto res = j.at("resolution").get<std::vector<int>>();
    if (res.size() != 2 || res[0] <= 0 || res[1] <= 0)
      throw ExportError("export '" + e.image_id + "': resolution must be [w,h] with w,h > 0");
    e.resolution = {res[0], res[1]};
    std::size_t idx = 0;
    for (const auto& o : j.at("objects")) {
      const auto where = "export '" + e.image_id + "' object " + std::to_string(idx++);
      DetectedObject obj;
      obj.label = o.at("label").get<std::string>();
      obj.score = o.at("score").get<double>();
      if (!(obj.score >= 0.0 && obj.score <= 1.0))
        throw ExportError(where + ": score outside [0,1]");
      const auto b = o.at("bbox").get<std::vector<int>>();
      if (b.size() != 4) throw ExportError(where + ": bbox must be [x,y,w,h]");
      obj.bbox = {b[0], b[1], b[2], b[3]};
      if (!obj.bbox.valid() ||
          !BoundingBox{0, 0, e.resolution.width, e.resolution.height}.contains(obj.bbox))
        throw ExportError(where + ": bbox outside the image");
      const auto counts = o.at("mask_rle").get<std::vector<long long>>();
      try {
        obj.mask = geometry::decode_rle(counts, e.resolution.width, e.resolution.height);
      } catch (const geometry::GeometryError& g) {
        throw ExportError(where + ": " + g.what());
      }
      if (auto fg = obj.mask.foreground_box(); fg && !obj.bbox.contains(*fg))
        throw ExportError(where + ": bbox does not bound the mask");
      e.objects.push_back(std::move(obj));
    }
  } catch (const json::exception& err) {
    throw ExportError("malformed detection export: " + std::string(err.what()));
  }
  return e;
}

DetectionExport load_export(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ExportError("cannot read detection export " + path.string());
  try {
    return parse_export(json::parse(in));
  } catch (const json::parse_error& err) {
    throw ExportError(path.string() + ": " + err.what());
  }
}

json to_json(const DetectionExport& e) {
  json objects = json::array();
  for (const auto& o : e.objects) {
    objects.push_back({{"label", o.label},
                       {"score", o.score},
                       {"bbox", {o.bbox.x, o.bbox.y, o.bbox.w, o.bbox.h}},
                       {"mask_rle", geometry::encode_rle(o.mask)}});
  }
  return {{"image_id", e.image_id},
          {"resolution", {e.resolution.width, e.resolution.height}},
          {"objects", objects}};
}

void validate(const ArtifactConfig& c) {
  if (!(c.score_drop_threshold >= 0)) throw Error("score_drop_threshold must be >= 0");
  if (!(0 < c.min_intersection && c.min_intersection < c.partial_band_max &&
        c.partial_band_max < c.max_intersection && c.max_intersection < 1))
    throw Error("intersection thresholds must satisfy 0 < min < band_max < max < 1");
}

ArtifactConfig config_from_json(const json& j, ArtifactConfig c) {
  try {
    c.score_drop_threshold = j.value("score_drop_threshold", c.score_drop_threshold);
    c.min_intersection = j.value("min_intersection", c.min_intersection);
    c.max_intersection = j.value("max_intersection", c.max_intersection);
    c.partial_band_max = j.value("partial_band_max", c.partial_band_max);
    if (j.contains("drop_scale")) {
      const auto s = j.at("drop_scale").get<std::string>();
      if (s == "absolute") c.drop_scale = DropScale::Absolute;
      else if (s == "relative") c.drop_scale = DropScale::Relative;
      else throw Error("drop_scale must be absolute or relative");
    }
    if (j.contains("combiner")) {
      const auto s = j.at("combiner").get<std::string>();
      if (s == "all") c.combiner = ViewCombiner::All;
      else if (s == "any") c.combiner = ViewCombiner::Any;
      else throw Error("combiner must be all or any");
    }
  } catch (const json::exception& err) {
    throw Error(std::string("artifact thresholds: ") + err.what());
  }
  validate(c);
  return c;
}

json to_json(const ArtifactConfig& c) {
  return {{"score_drop_threshold", c.score_drop_threshold},
          {"min_intersection", c.min_intersection},
          {"max_intersection", c.max_intersection},
          {"partial_band_max", c.partial_band_max},
          {"drop_scale", c.drop_scale == DropScale::Absolute ? "absolute" : "relative"},
          {"combiner", c.combiner == ViewCombiner::All ? "all" : "any"}};
}

std::string_view to_string(Method m) {
  return m == Method::ScoreDrop ? "score_drop" : "secondary_object";
}
std::string_view to_string(Presence p) {
  return p == Presence::Disappeared ? "disappeared" : "appeared";
}

namespace {

struct ViewObject {
  BoundingBox bbox;
  BinaryMask mask;
};

std::vector<ViewObject> at_view(const DetectionExport& e, Dimensions view) {
  std::vector<ViewObject> out;
  out.reserve(e.objects.size());
  for (const auto& o : e.objects) {
    out.push_back({geometry::scale_box(o.bbox, e.resolution, view),
                   geometry::resample_mask(o.mask, view)});
  }
  return out;
}

}  // namespace

std::vector<ArtifactFinding> detect_score_drop(const DetectionExport& src, const DetectionExport& tgt,
                                               const BinaryMask& edit_mask,
                                               const ArtifactConfig& cfg) {
  validate(cfg);
  std::vector<Dimensions> views{src.resolution};
  if (!(tgt.resolution == src.resolution)) views.push_back(tgt.resolution);

  std::map<std::size_t, ArtifactFinding> by_object;
  std::map<std::size_t, int> candidate_views;

  for (const auto view : views) {
    const auto edit = geometry::resample_mask(edit_mask, view);
    const auto s = at_view(src, view);
    const auto t = at_view(tgt, view);

    std::vector<std::size_t> candidates;
    std::vector<double> ratios(s.size(), 0.0);
    for (std::size_t i = 0; i < s.size(); ++i) {
      ratios[i] = geometry::intersection_ratio(s[i].mask, edit);
      if (ratios[i] > cfg.min_intersection && ratios[i] < cfg.partial_band_max &&
          ratios[i] <= cfg.max_intersection)
        candidates.push_back(i);
    }

    // (overlap, src index, tgt index); greedy one-to-one by overlap.
    std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> pairs;
    for (auto i : candidates) {
      for (std::size_t j = 0; j < t.size(); ++j) {
        if (tgt.objects[j].label != src.objects[i].label) continue;
        if (!geometry::bbox_intersects(s[i].bbox, t[j].bbox)) continue;
        const auto ov = geometry::overlap_count(s[i].mask, t[j].mask);
        if (ov > 0) pairs.emplace_back(ov, i, j);
      }
    }
    std::sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) {
      if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
      return std::tie(std::get<1>(a), std::get<2>(a)) < std::tie(std::get<1>(b), std::get<2>(b));
    });
    std::map<std::size_t, std::size_t> partner;
    std::vector<char> taken(t.size(), 0);
    for (const auto& [ov, i, j] : pairs) {
      if (partner.contains(i) || taken[j]) continue;
      partner[i] = j;
      taken[j] = 1;
    }

    for (auto i : candidates) {
      ViewEvidence ev;
      ev.resolution = view;
      ev.intersection = ratios[i];
      ev.src_score = src.objects[i].score;
      if (auto it = partner.find(i); it != partner.end()) {
        ev.counterpart = it->second;
        ev.tgt_score = tgt.objects[it->second].score;
      }
      double drop = ev.src_score - ev.tgt_score;
      if (cfg.drop_scale == DropScale::Relative)
        drop = ev.src_score > 0 ? drop / ev.src_score : 0.0;
      ev.dropped = drop > cfg.score_drop_threshold + kScoreEps;

      auto& f = by_object[i];
      f.method = Method::ScoreDrop;
      f.class_label = src.objects[i].label;
      f.object_index = i;
      f.views.push_back(ev);
      ++candidate_views[i];
    }
  }

  std::vector<ArtifactFinding> out;
  for (auto& [i, f] : by_object) {
    f.resolutions_confirmed = static_cast<int>(
        std::count_if(f.views.begin(), f.views.end(), [](const auto& v) { return v.dropped; }));
    const bool hit = cfg.combiner == ViewCombiner::All
                         ? f.resolutions_confirmed == static_cast<int>(views.size())
                         : f.resolutions_confirmed > 0;
    if (!hit) continue;
    // Report the evidence of the first confirming view.
    const auto& v = *std::find_if(f.views.begin(), f.views.end(), [](const auto& x) { return x.dropped; });
    f.src_score = v.src_score;
    f.tgt_score = v.tgt_score;
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<BoundingBox> main_object_boxes(const DetectionExport& e, std::string_view main_object,
                                           const lexicon::NounLexicon& lex) {
  std::vector<BoundingBox> out;
  for (const auto& o : e.objects)
    if (lexicon::lexical_similar(o.label, main_object, lex)) out.push_back(o.bbox);
  return out;
}

std::vector<ArtifactFinding> detect_secondary_changes(const DetectionExport& src,
                                                      const DetectionExport& tgt,
                                                      const BinaryMask& edit_mask,
                                                      const MainBoxes& main_boxes,
                                                      std::string_view main_object,
                                                      ActionType action,
                                                      const lexicon::NounLexicon& lex) {
  if (action != ActionType::Add && action != ActionType::Remove) {
    throw Error("secondary-object check applies to Add and Remove edits, not " +
                std::string(to_string(action)));
  }
  const bool removal = action == ActionType::Remove;
  // The side where the secondary object must be present, and the other side.
  const auto& here = removal ? src : tgt;
  const auto& there = removal ? tgt : src;
  const auto view = here.resolution;
  const auto edit = geometry::resample_mask(edit_mask, view);

  std::vector<BoundingBox> main_here;
  for (const auto& b : main_boxes.src)
    main_here.push_back(geometry::scale_box(b, src.resolution, view));
  for (const auto& b : main_boxes.tgt)
    main_here.push_back(geometry::scale_box(b, tgt.resolution, view));

  std::vector<ArtifactFinding> out;
  for (std::size_t i = 0; i < here.objects.size(); ++i) {
    const auto& o = here.objects[i];
    if (lexicon::lexical_similar(o.label, main_object, lex)) continue;
    if (geometry::overlap_count(o.mask, edit) == 0) continue;
    if (std::any_of(main_here.begin(), main_here.end(),
                    [&](const auto& b) { return geometry::bbox_intersects(o.bbox, b); }))
      continue;
    const bool still_there = std::any_of(there.objects.begin(), there.objects.end(), [&](const auto& p) {
      return (p.label == o.label || lexicon::lexical_similar(p.label, o.label, lex)) &&
             geometry::bbox_intersects(o.bbox, geometry::scale_box(p.bbox, there.resolution, view));
    });
    if (still_there) continue;
    ArtifactFinding f;
    f.method = Method::SecondaryObject;
    f.class_label = o.label;
    f.object_index = i;
    f.presence = removal ? Presence::Disappeared : Presence::Appeared;
    f.resolutions_confirmed = 1;
    out.push_back(std::move(f));
  }
  return out;
}

json to_json(const ArtifactFinding& f) {
  json j{{"method", to_string(f.method)},
         {"class_label", f.class_label},
         {"object_index", f.object_index},
         {"resolutions_confirmed", f.resolutions_confirmed}};
  if (f.src_score) j["src_score"] = *f.src_score;
  if (f.tgt_score) j["tgt_score"] = *f.tgt_score;
  if (f.presence) j["presence"] = to_string(*f.presence);
  if (!f.views.empty()) {
    json views = json::array();
    for (const auto& v : f.views) {
      json jv{{"resolution", {v.resolution.width, v.resolution.height}},
              {"intersection", v.intersection},
              {"src_score", v.src_score},
              {"tgt_score", v.tgt_score},
              {"dropped", v.dropped}};
      if (v.counterpart) jv["counterpart"] = *v.counterpart;
      views.push_back(jv);
    }
    j["views"] = views;
  }
  return j;
}

}  // namespace editaudit::artifacts
