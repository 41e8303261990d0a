// SPDX-License-Identifier: Apache-2.0
#include "editaudit/augment/augment.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "editaudit/core/text.hpp"
#include "editaudit/pipeline/prompts.hpp"

namespace editaudit::augment {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(Label l) { return l == Label::Positive ? "positive" : "negative"; }

std::string_view to_string(Lineage l) {
  switch (l) {
    case Lineage::Original: return "original";
    case Lineage::Reversed: return "reversed";
    case Lineage::Negative: return "negative";
    case Lineage::ReversedNegative: return "reversed_negative";
  }
  return "?";
}

namespace {

std::string_view id_suffix(Lineage l) {
  switch (l) {
    case Lineage::Original: return "orig";
    case Lineage::Reversed: return "rev";
    case Lineage::Negative: return "neg";
    case Lineage::ReversedNegative: return "revneg";
  }
  return "?";
}

Lineage parse_lineage(std::string_view s) {
  for (auto l : {Lineage::Original, Lineage::Reversed, Lineage::Negative, Lineage::ReversedNegative})
    if (s == to_string(l)) return l;
  throw AugmentError("unknown lineage '" + std::string(s) + "'");
}

std::string or_none(const std::string& s) { return s.empty() ? "none" : s; }

struct Rewrite {
  std::string instruction;
  std::string caption;
};

Rewrite parse_rewrite(std::string_view reply) {
  Rewrite r;
  for (const auto& raw : text::split(reply, '\n')) {
    const auto line = text::trim(raw);
    if (text::starts_with_icase(line, "instruction:"))
      r.instruction = std::string(text::trim(line.substr(12)));
    else if (text::starts_with_icase(line, "caption:"))
      r.caption = std::string(text::trim(line.substr(8)));
  }
  if (r.instruction.empty() || r.caption.empty())
    throw AugmentError("rewrite reply lacks INSTRUCTION or CAPTION line");
  return r;
}

const std::vector<std::string_view>& colours() {
  static const std::vector<std::string_view> k = {"red",   "blue",  "green", "yellow", "white",
                                                  "black", "brown", "pink",  "purple", "orange",
                                                  "gray",  "grey"};
  return k;
}

const std::vector<std::string_view>& materials() {
  static const std::vector<std::string_view> k = {"wooden", "metal", "glass",  "stone",
                                                  "plastic", "marble", "carpet", "brick"};
  return k;
}

// Swaps the first word of `phrase` found in `table` for the first table
// entry that occurs in neither phrase. nullopt when nothing applies.
std::optional<std::string> substitute_attribute(const std::string& phrase, const std::string& other,
                                                const std::vector<std::string_view>& table) {
  auto words = text::split(phrase, ' ');
  const auto other_tokens = text::word_tokens(other);
  const auto phrase_tokens = text::word_tokens(phrase);
  auto used = [&](std::string_view w) {
    return std::find(other_tokens.begin(), other_tokens.end(), w) != other_tokens.end() ||
           std::find(phrase_tokens.begin(), phrase_tokens.end(), w) != phrase_tokens.end();
  };
  for (auto& w : words) {
    if (std::find(table.begin(), table.end(), text::to_lower(w)) == table.end()) continue;
    for (auto candidate : table) {
      if (used(candidate) || (candidate == "grey" && used("gray")) || (candidate == "gray" && used("grey")))
        continue;
      w = std::string(candidate);
      std::string out;
      for (const auto& x : words) out += (out.empty() ? "" : " ") + x;
      return out;
    }
  }
  return std::nullopt;
}

bool same_kind(std::string_view a, std::string_view b, const lexicon::NounLexicon& lex) {
  const auto ha = lexicon::head_noun(a, lex);
  const auto hb = lexicon::head_noun(b, lex);
  return ha == hb || lexicon::lexical_similar(a, b, lex);
}

}  // namespace

TrainingInstance make_original(const EditRecord& edit, const pipeline::PipelineMetadata& meta) {
  TrainingInstance t;
  t.id = edit.id + "#" + std::string(id_suffix(Lineage::Original));
  t.edit_id = edit.id;
  t.first_image = edit.source_image;
  t.second_image = edit.edited_image;
  t.instruction = edit.instruction;
  t.difference_caption = meta.short_caption;
  t.action = meta.action;
  t.source_object = meta.source_object;
  t.target_object = meta.target_object;
  return t;
}

TrainingInstance reverse_edit(const TrainingInstance& inst, providers::Provider& provider) {
  TrainingInstance r = inst;
  std::swap(r.first_image, r.second_image);
  switch (inst.action) {
    case ActionType::Add:
      if (inst.target_object.empty()) throw AugmentError(inst.id + ": Add without target object");
      r.action = ActionType::Remove;
      break;
    case ActionType::Remove:
      if (inst.source_object.empty()) throw AugmentError(inst.id + ": Remove without source object");
      r.action = ActionType::Add;
      break;
    case ActionType::Replace:
    case ActionType::ChangeAttribute:
      if (inst.source_object.empty() || inst.target_object.empty())
        throw AugmentError(inst.id + ": " + std::string(to_string(inst.action)) +
                           " needs both objects");
      break;
  }
  std::swap(r.source_object, r.target_object);
  switch (inst.lineage) {
    case Lineage::Original: r.lineage = Lineage::Reversed; break;
    case Lineage::Reversed: r.lineage = Lineage::Original; break;
    case Lineage::Negative: r.lineage = Lineage::ReversedNegative; break;
    case Lineage::ReversedNegative: r.lineage = Lineage::Negative; break;
  }
  r.id = inst.edit_id + "#" + std::string(id_suffix(r.lineage));

  const auto prompt = text::fill_slots(
      prompts::get("rewrite_reverse"),
      {std::string(to_string(r.action)), inst.instruction, inst.difference_caption});
  const auto rw = parse_rewrite(provider.complete(prompt));
  r.instruction = rw.instruction;
  r.difference_caption = rw.caption;
  return r;
}

TrainingInstance negative_edit(const TrainingInstance& inst, const NegativeContext& ctx,
                               providers::Provider& provider, const lexicon::NounLexicon& lex) {
  TrainingInstance n = inst;
  n.label = Label::Negative;
  n.lineage = Lineage::Negative;
  n.id = inst.edit_id + "#" + std::string(id_suffix(Lineage::Negative));

  switch (inst.action) {
    case ActionType::Remove: {
      n.true_object = inst.source_object;
      if (ctx.scene.empty()) throw AugmentError(inst.id + ": no scene objects for a Remove negative");
      if (!ctx.object_area || *ctx.object_area <= 0)
        throw AugmentError(inst.id + ": edited object area unknown");
      const double area = static_cast<double>(*ctx.object_area);
      const SceneObject* best = nullptr;
      for (const auto& s : ctx.scene) {
        if (same_kind(s.label, n.true_object, lex)) continue;
        const double diff = std::abs(static_cast<double>(s.area) - area);
        if (diff > 0.5 * area) continue;
        if (!best) {
          best = &s;
          continue;
        }
        const double best_diff = std::abs(static_cast<double>(best->area) - area);
        if (diff < best_diff || (diff == best_diff && s.label < best->label)) best = &s;
      }
      if (!best) throw AugmentError(inst.id + ": no scene object of similar size");
      n.source_object = best->label;
      break;
    }
    case ActionType::Add:
    case ActionType::Replace: {
      n.true_object = inst.target_object;
      const auto reply = provider.complete(
          text::fill_slots(prompts::get("negative_candidates"), {inst.target_object}));
      std::optional<std::string> chosen;
      for (const auto& raw : text::split(reply, '\n')) {
        auto cand = text::normalize_phrase(raw);
        while (!cand.empty() && !std::isalpha(static_cast<unsigned char>(cand.front())))
          cand.erase(cand.begin());
        while (!cand.empty() && !std::isalpha(static_cast<unsigned char>(cand.back())))
          cand.pop_back();
        if (cand.empty() || lexicon::head_noun(cand, lex).empty()) continue;
        if (same_kind(cand, n.true_object, lex)) continue;
        if (!inst.source_object.empty() && same_kind(cand, inst.source_object, lex)) continue;
        const bool in_scene = std::any_of(ctx.scene.begin(), ctx.scene.end(), [&](const auto& s) {
          return same_kind(s.label, cand, lex);
        });
        if (in_scene) continue;
        chosen = cand;
        break;
      }
      if (!chosen) throw AugmentError(inst.id + ": no usable deceptive object suggested");
      n.target_object = *chosen;
      break;
    }
    case ActionType::ChangeAttribute: {
      n.true_object = inst.target_object;
      auto swapped = substitute_attribute(inst.target_object, inst.source_object, colours());
      if (!swapped) swapped = substitute_attribute(inst.target_object, inst.source_object, materials());
      if (!swapped)
        throw AugmentError(inst.id + ": no colour or material word in '" + inst.target_object + "'");
      n.target_object = *swapped;
      break;
    }
  }

  const auto prompt = text::fill_slots(
      prompts::get("rewrite_negative"),
      {std::string(to_string(n.action)), or_none(n.source_object), or_none(n.target_object),
       inst.instruction});
  const auto rw = parse_rewrite(provider.complete(prompt));
  n.instruction = rw.instruction;
  n.difference_caption = rw.caption;
  return n;
}

std::size_t ExpandResult::count(Lineage l) const {
  return static_cast<std::size_t>(std::count_if(instances.begin(), instances.end(),
                                                [&](const auto& i) { return i.lineage == l; }));
}

ExpandResult expand(std::span<const TrainingInstance> originals,
                    const std::map<std::string, NegativeContext>& contexts,
                    providers::Provider& provider, const lexicon::NounLexicon& lex) {
  ExpandResult out;
  std::vector<TrainingInstance> reversed, negatives, reversed_negatives;
  static const NegativeContext kEmpty;
  for (const auto& o : originals) {
    if (o.lineage != Lineage::Original || o.label != Label::Positive)
      throw AugmentError(o.id + ": expand takes original positives only");
    out.instances.push_back(o);
    try {
      reversed.push_back(reverse_edit(o, provider));
    } catch (const Error& e) {
      out.failures.push_back({o.edit_id, Lineage::Reversed, e.what()});
    }
    const auto it = contexts.find(o.edit_id);
    try {
      auto n = negative_edit(o, it == contexts.end() ? kEmpty : it->second, provider, lex);
      try {
        reversed_negatives.push_back(reverse_edit(n, provider));
      } catch (const Error& e) {
        out.failures.push_back({o.edit_id, Lineage::ReversedNegative, e.what()});
      }
      negatives.push_back(std::move(n));
    } catch (const Error& e) {
      out.failures.push_back({o.edit_id, Lineage::Negative, e.what()});
      out.failures.push_back({o.edit_id, Lineage::ReversedNegative, "negative failed"});
    }
  }
  for (auto* bucket : {&reversed, &negatives, &reversed_negatives})
    for (auto& i : *bucket) out.instances.push_back(std::move(i));
  return out;
}

void write_training_manifest(std::span<const TrainingInstance> instances, const fs::path& path) {
  const auto base = path.parent_path();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw AugmentError("cannot write " + path.string());
  const auto abs_base = fs::absolute(base.empty() ? fs::path(".") : base).lexically_normal();
  auto rel = [&](const fs::path& p) {
    return fs::absolute(p).lexically_normal().lexically_proximate(abs_base).generic_string();
  };
  for (const auto& i : instances) {
    json j{{"id", i.id},
           {"edit_id", i.edit_id},
           {"source", rel(i.first_image)},
           {"edited", rel(i.second_image)},
           {"instruction", i.instruction},
           {"caption", i.difference_caption},
           {"action", to_string(i.action)},
           {"source_object", i.source_object},
           {"target_object", i.target_object},
           {"label", to_string(i.label)},
           {"lineage", to_string(i.lineage)}};
    if (!i.true_object.empty()) j["true_object"] = i.true_object;
    out << j.dump() << '\n';
  }
}

std::vector<TrainingInstance> load_training_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw AugmentError("cannot read " + path.string());
  const auto base = path.parent_path();
  std::vector<TrainingInstance> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (text::trim(line).empty()) continue;
    try {
      const auto j = json::parse(line);
      TrainingInstance t;
      t.id = j.at("id");
      t.edit_id = j.at("edit_id");
      t.first_image = (base / j.at("source").get<std::string>()).lexically_normal();
      t.second_image = (base / j.at("edited").get<std::string>()).lexically_normal();
      t.instruction = j.at("instruction");
      t.difference_caption = j.at("caption");
      t.action = parse_action(j.at("action").get<std::string>());
      t.source_object = j.at("source_object");
      t.target_object = j.at("target_object");
      t.label = j.at("label") == "negative" ? Label::Negative : Label::Positive;
      t.lineage = parse_lineage(j.at("lineage").get<std::string>());
      t.true_object = j.value("true_object", "");
      out.push_back(std::move(t));
    } catch (const json::exception& e) {
      throw AugmentError(path.string() + " line " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace editaudit::augment
