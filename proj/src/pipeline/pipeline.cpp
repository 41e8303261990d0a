// SPDX-License-Identifier: Apache-2.0
#include "editaudit/pipeline/pipeline.hpp"

#include <algorithm>

#include "editaudit/core/image.hpp"
#include "editaudit/core/text.hpp"
#include "editaudit/pipeline/prompts.hpp"

namespace editaudit::pipeline {

using geometry::BoundingBox;

std::string_view to_string(Region r) {
  switch (r) {
    case Region::Tight: return "tight";
    case Region::Padded: return "padded";
    case Region::Full: return "full";
  }
  return "?";
}

Region parse_region(std::string_view text) {
  for (auto r : kRegionOrder)
    if (to_string(r) == text) return r;
  throw ParseError("unknown region: " + std::string(text));
}

const std::optional<std::string>* ImageDescriptions::find(Region r) const {
  if (r == Region::Tight) return &tight;
  if (r == Region::Padded) return &padded;
  return nullptr;
}

std::vector<Region> ImageDescriptions::available() const {
  std::vector<Region> out;
  if (tight) out.push_back(Region::Tight);
  if (padded) out.push_back(Region::Padded);
  out.push_back(Region::Full);
  return out;
}

const std::string& ImageDescriptions::text(Region r) const {
  if (r == Region::Full) return full;
  const auto* slot = find(r);
  if (!slot || !*slot) throw PipelineError("no " + std::string(to_string(r)) + " description");
  return **slot;
}

namespace {

std::string describe(providers::Provider& provider, const Image& img) {
  return provider.describe_image(providers::make_image_input(img), prompts::get("describe_region"));
}

Image crop_box(const Image& img, const BoundingBox& b) { return crop(img, b.x, b.y, b.w, b.h); }

// A single usable box, or nullopt when the full images must be used.
std::optional<geometry::ZoomCrops> single_box_crops(const geometry::BinaryMask& mask,
                                                    Dimensions dims) {
  const auto boxes = geometry::bboxes_from_mask(mask);
  if (boxes.size() != 1) return std::nullopt;
  const auto clamped = geometry::clamp(boxes.front(), dims.width, dims.height);
  if (!clamped || !clamped->valid()) return std::nullopt;
  try {
    return geometry::zoom_crops(dims, *clamped);
  } catch (const geometry::GeometryError&) {
    return std::nullopt;
  }
}

}  // namespace

RegionDescriptions gather_descriptions(const EditRecord& edit, providers::Provider& provider) {
  const auto source = read_image(edit.source_image);
  const auto edited = read_image(edit.edited_image);
  const auto mask = geometry::read_mask(edit.edit_mask);
  const Dimensions src_dims{source.width, source.height};
  const Dimensions dst_dims{edited.width, edited.height};

  RegionDescriptions out;
  std::optional<geometry::ZoomCrops> crops;
  if (mask.dimensions() == src_dims) crops = single_box_crops(mask, src_dims);

  if (crops) {
    const auto tight_e = geometry::scale_box(crops->tight, src_dims, dst_dims);
    const auto padded_e = geometry::scale_box(crops->padded, src_dims, dst_dims);
    out.source.tight = describe(provider, crop_box(source, crops->tight));
    out.source.padded = describe(provider, crop_box(source, crops->padded));
    out.source.full = describe(provider, source);
    out.edited.tight = describe(provider, crop_box(edited, tight_e));
    out.edited.padded = describe(provider, crop_box(edited, padded_e));
    out.edited.full = describe(provider, edited);
    out.crops = crops;
  } else {
    out.source.full = describe(provider, source);
    out.edited.full = describe(provider, edited);
  }
  return out;
}

std::vector<Region> select_grounded(std::string_view instruction, const ImageDescriptions& descs,
                                    const lexicon::NounLexicon& lex) {
  const auto regions = descs.available();
  const auto instr = lexicon::extract_nouns(instruction, lex);
  std::vector<std::vector<std::string>> nouns;
  std::vector<std::size_t> overlap;
  for (auto r : regions) {
    nouns.push_back(lexicon::extract_nouns(descs.text(r), lex));
    overlap.push_back(lexicon::noun_overlap(instr, nouns.back(), lex));
  }

  std::vector<std::size_t> idx(regions.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;

  const auto best = *std::max_element(overlap.begin(), overlap.end());
  if (best > 0) {
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return overlap[a] > overlap[b]; });
  } else {
    std::vector<int> rank(regions.size(), 2);
    for (std::size_t i = 0; i < regions.size(); ++i) {
      if (regions[i] == Region::Full) rank[i] = 1;
      for (std::size_t k = 0; k < regions.size(); ++k) {
        if (k != i && lexicon::noun_overlap(nouns[i], nouns[k], lex) > 0) {
          rank[i] = 0;
          break;
        }
      }
    }
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return rank[a] < rank[b]; });
  }
  std::vector<Region> out;
  for (auto i : idx) out.push_back(regions[i]);
  return out;
}

std::optional<PipelineMetadata> parse_metadata_reply(std::string_view reply) {
  struct Field {
    std::string_view label;
    std::string PipelineMetadata::*slot;
  };
  static const Field kFields[] = {
      {"source object", &PipelineMetadata::source_object},
      {"target object", &PipelineMetadata::target_object},
      {"short caption", &PipelineMetadata::short_caption},
      {"extensive caption", &PipelineMetadata::extensive_caption},
      {"revised instruction", &PipelineMetadata::revised_instruction},
      {"explanation", &PipelineMetadata::explanation},
  };
  PipelineMetadata m;
  std::optional<std::string> action_text;
  std::string* current = nullptr;
  std::size_t seen = 0;
  for (const auto& raw : text::split(reply, '\n')) {
    auto line = text::trim(raw);
    // tolerate markdown bold labels
    while (line.starts_with("*")) line.remove_prefix(1);
    const auto colon = line.find(':');
    std::string label = colon == std::string_view::npos
                            ? std::string()
                            : text::normalize_phrase(std::string(line.substr(0, colon)));
    std::erase(label, '*');
    auto rest = colon == std::string_view::npos ? std::string_view() : line.substr(colon + 1);
    while (rest.starts_with("*")) rest.remove_prefix(1);
    std::string value(text::trim(rest));
    if (label == "action") {
      action_text = value;
      current = nullptr;
      continue;
    }
    bool matched = false;
    for (const auto& f : kFields) {
      if (label == f.label) {
        m.*(f.slot) = value;
        current = &(m.*(f.slot));
        ++seen;
        matched = true;
        break;
      }
    }
    if (!matched && current && !line.empty()) {
      *current += current->empty() ? "" : " ";
      *current += std::string(line);
    }
  }
  if (!action_text || seen < std::size(kFields)) return std::nullopt;
  const auto action = try_parse_action(*action_text);
  if (!action) return std::nullopt;
  m.action = *action;
  for (auto* obj : {&m.source_object, &m.target_object}) {
    const auto low = text::to_lower(*obj);
    if (low == "none" || low == "n/a" || low == "-") obj->clear();
  }
  if (text::trim(m.short_caption).empty()) return std::nullopt;
  return m;
}

PipelineMetadata generate_metadata(const EditRecord& edit, const RegionDescriptions& descs,
                                   std::span<const Region> source_rank,
                                   std::span<const Region> edited_rank,
                                   providers::Provider& provider) {
  if (source_rank.empty() || edited_rank.empty()) throw PipelineError("empty region ranking");
  const auto attempts = std::max(source_rank.size(), edited_rank.size());
  for (std::size_t k = 0; k < attempts; ++k) {
    const auto rs = source_rank[std::min(k, source_rank.size() - 1)];
    const auto re = edited_rank[std::min(k, edited_rank.size() - 1)];
    const auto& src_text = descs.source.text(rs);
    const auto& dst_text = descs.edited.text(re);
    if (text::trim(src_text).empty() || text::trim(dst_text).empty()) continue;
    const auto prompt =
        text::fill_slots(prompts::get("metadata_one_shot"), {edit.instruction, src_text, dst_text});
    if (auto m = parse_metadata_reply(provider.complete(prompt))) {
      m->edit_id = edit.id;
      m->grounding_source = rs;
      m->grounding_edited = re;
      m->retries = static_cast<int>(k);
      return *m;
    }
  }
  throw PipelineError("edit " + edit.id + ": no valid metadata after " + std::to_string(attempts) +
                      " region choice(s)");
}

PipelineMetadata run_pipeline(const EditRecord& edit, providers::Provider& provider,
                              const lexicon::NounLexicon& lex) {
  const auto descs = gather_descriptions(edit, provider);
  const auto rs = select_grounded(edit.instruction, descs.source, lex);
  const auto re = select_grounded(edit.instruction, descs.edited, lex);
  return generate_metadata(edit, descs, rs, re, provider);
}

nlohmann::json to_json(const PipelineMetadata& m) {
  return {{"id", m.edit_id},
          {"action", to_string(m.action)},
          {"source_object", m.source_object},
          {"target_object", m.target_object},
          {"short_caption", m.short_caption},
          {"extensive_caption", m.extensive_caption},
          {"revised_instruction", m.revised_instruction},
          {"explanation", m.explanation},
          {"grounding", {{"source", to_string(m.grounding_source)},
                         {"edited", to_string(m.grounding_edited)}}},
          {"retries", m.retries}};
}

PipelineMetadata metadata_from_json(const nlohmann::json& j) {
  PipelineMetadata m;
  m.edit_id = j.at("id").get<std::string>();
  m.action = parse_action(j.at("action").get<std::string>());
  m.source_object = j.at("source_object").get<std::string>();
  m.target_object = j.at("target_object").get<std::string>();
  m.short_caption = j.at("short_caption").get<std::string>();
  m.extensive_caption = j.at("extensive_caption").get<std::string>();
  m.revised_instruction = j.at("revised_instruction").get<std::string>();
  m.explanation = j.at("explanation").get<std::string>();
  m.grounding_source = parse_region(j.at("grounding").at("source").get<std::string>());
  m.grounding_edited = parse_region(j.at("grounding").at("edited").get<std::string>());
  m.retries = j.at("retries").get<int>();
  return m;
}

double Distribution::percent(ActionType a) const {
  if (total == 0) return 0;
  auto it = counts.find(a);
  return it == counts.end() ? 0 : 100.0 * static_cast<double>(it->second) / static_cast<double>(total);
}

Distribution distribution(std::span<const PipelineMetadata> runs) {
  Distribution d;
  for (auto a : kAllActions) d.counts[a] = 0;
  for (const auto& r : runs) ++d.counts[r.action];
  d.total = runs.size();
  return d;
}

}  // namespace editaudit::pipeline
