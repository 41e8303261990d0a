// SPDX-License-Identifier: Apache-2.0
#include "editaudit/report/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "editaudit/annotate/server.hpp"
#include "editaudit/annotate/store.hpp"
#include "editaudit/artifacts/artifacts.hpp"
#include "editaudit/augment/augment.hpp"
#include "editaudit/core/digest.hpp"
#include "editaudit/core/manifest.hpp"
#include "editaudit/core/parallel.hpp"
#include "editaudit/core/text.hpp"
#include "editaudit/core/version.hpp"
#include "editaudit/geometry/mask.hpp"
#include "editaudit/harness/harness.hpp"
#include "editaudit/lexicon/lexicon.hpp"
#include "editaudit/pipeline/pipeline.hpp"
#include "editaudit/pipeline/prompts.hpp"
#include "editaudit/providers/judge.hpp"
#include "editaudit/providers/provider.hpp"
#include "editaudit/report/report.hpp"
#include "editaudit/triplets/triplets.hpp"

namespace editaudit::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Options {
  std::string manifest;
  std::string provider;
  std::string cassettes;
  std::string mode = "replay";
  std::string out;
  std::string lexicon = EDITAUDIT_DEFAULT_LEXICON;
  std::string judge = "lexical";
  std::string thresholds;
  std::string slices;
  std::string model_name;

  // metrics
  std::string human;
  std::string model;
  // artifacts, augment
  std::string exports;
  // artifacts, inspect, augment, serve
  std::string pipeline;
  // inspect
  std::string questions;
  std::string labels;
  // serve
  std::string store;
  std::string annotators;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string static_dir;
  std::size_t cap = 3;
  // report
  std::vector<std::string> score_files;
  std::vector<std::string> metric_files;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

json read_json_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

std::vector<json> read_jsonl(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::vector<json> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::parse_error& e) {
      throw Error(path.string() + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::string file_digest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return sha256_hex(content);
}

artifacts::ArtifactConfig parse_thresholds(const std::string& spec) {
  if (spec.empty()) return {};
  json j;
  if (fs::is_regular_file(spec)) {
    j = read_json_file(spec);
  } else {
    j = json::object();
    for (const auto& item : text::split(spec, ',')) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw UsageError("--thresholds expects key=value pairs or a file");
      const auto key = std::string(text::trim(item.substr(0, eq)));
      const auto value = std::string(text::trim(item.substr(eq + 1)));
      if (key == "drop_scale" || key == "combiner") {
        j[key] = value;
      } else {
        try {
          std::size_t used = 0;
          j[key] = std::stod(value, &used);
          if (used != value.size()) throw std::invalid_argument(value);
        } catch (const std::exception&) {
          throw UsageError("--thresholds: " + key + " is not a number: " + value);
        }
      }
    }
  }
  static const std::set<std::string> known = {"score_drop_threshold", "min_intersection",
                                              "max_intersection",     "partial_band_max",
                                              "drop_scale",           "combiner"};
  for (const auto& [k, v] : j.items())
    if (!known.contains(k)) throw UsageError("unknown threshold: " + k);
  return artifacts::config_from_json(j);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  for (const auto& part : text::split(s, ',')) {
    const auto t = std::string(text::trim(part));
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

json triplet_json(const DifferenceTriplet& t) {
  auto opt = [](const std::optional<std::string>& s) { return s ? json(*s) : json(nullptr); };
  return json::array({to_string(t.action()), opt(t.source()), opt(t.target())});
}

DifferenceTriplet triplet_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) throw Error("triplet must be [action, source, target]");
  auto opt = [](const json& v) {
    return v.is_null() ? std::nullopt : std::optional<std::string>(v.get<std::string>());
  };
  return DifferenceTriplet(opt(j[1]), opt(j[2]), parse_action(j[0].get<std::string>()));
}

/// One line per edit: {"id", "caption"} or {"id", "triplets": [[action, source, target], ...]}.
struct CaptionEntry {
  std::optional<std::string> caption;
  std::optional<std::vector<DifferenceTriplet>> triplets;
};

std::map<std::string, CaptionEntry> read_captions(const fs::path& path) {
  std::map<std::string, CaptionEntry> out;
  for (const auto& j : read_jsonl(path)) {
    const auto id = j.at("id").get<std::string>();
    CaptionEntry e;
    if (j.contains("caption")) e.caption = j.at("caption").get<std::string>();
    if (j.contains("triplets")) {
      e.triplets.emplace();
      for (const auto& t : j.at("triplets")) e.triplets->push_back(triplet_from_json(t));
    }
    if (!e.caption && !e.triplets) throw Error(path.string() + ": " + id + " has neither caption nor triplets");
    if (!out.emplace(id, std::move(e)).second) throw Error(path.string() + ": duplicate id " + id);
  }
  return out;
}

std::map<std::string, pipeline::PipelineMetadata> read_pipeline_output(const fs::path& path) {
  std::map<std::string, pipeline::PipelineMetadata> out;
  const auto doc = read_json_file(path);
  for (const auto& r : doc.at("records")) {
    auto m = pipeline::metadata_from_json(r);
    out.emplace(m.edit_id, std::move(m));
  }
  return out;
}

class Run {
 public:
  Run(Options o, std::ostream& out, std::ostream& err, std::shared_ptr<providers::Transport> transport)
      : o_(std::move(o)), out_(out), err_(err), transport_(std::move(transport)) {}

  int metrics();
  int artifacts_cmd();
  int pipeline_cmd();
  int inspect();
  int augment_cmd();
  int serve();
  int report_cmd();

 private:
  const EditSet& edits() {
    if (!edits_) {
      if (o_.manifest.empty()) throw UsageError("--manifest is required");
      edits_ = load_manifest(o_.manifest);
      metadata_["manifest_sha256"] = edits_->manifest_sha256;
    }
    return *edits_;
  }

  const lexicon::NounLexicon& lex() {
    if (!lex_) {
      lex_ = lexicon::NounLexicon::load(o_.lexicon);
      metadata_["lexicon_version"] = lex_->version();
    }
    return *lex_;
  }

  providers::Provider& provider() {
    if (!provider_) {
      if (o_.provider.empty()) throw UsageError("--provider is required");
      const auto mode = providers::parse_mode(o_.mode);
      if (mode != providers::CassetteMode::Live && o_.cassettes.empty())
        throw UsageError("--cassettes is required in " + o_.mode + " mode");
      auto cfg = providers::load_config(o_.provider);
      std::shared_ptr<providers::Transport> transport;
      if (mode != providers::CassetteMode::Replay)
        transport = transport_ ? transport_ : std::make_shared<providers::HttpTransport>();
      std::optional<fs::path> dir;
      if (!o_.cassettes.empty()) dir = o_.cassettes;
      metadata_["provider"] = {{"provider_id", cfg.provider_id}, {"model", cfg.model_name}};
      metadata_["cassette_mode"] = std::string(providers::to_string(mode));
      provider_ = std::make_unique<providers::Provider>(std::move(cfg), transport, mode, dir);
    }
    return *provider_;
  }

  providers::Judge& judge() {
    if (!judge_) {
      const auto kind = providers::parse_judge_kind(o_.judge);
      if (kind == providers::JudgeKind::Llm)
        judge_ = std::make_unique<providers::LlmJudge>(provider());
      else
        judge_ = std::make_unique<providers::LexicalJudge>(lex());
      metadata_["judge"] = std::string(providers::to_string(kind));
    }
    return *judge_;
  }

  int workers() const { return provider_ ? provider_->config().max_parallel : 1; }

  void note_input(const std::string& name, const fs::path& path) {
    metadata_["inputs"][name] = file_digest(path);
  }

  fs::path out_dir() const {
    if (o_.out.empty()) throw UsageError("--out is required");
    return o_.out;
  }

  /// Writes run_metadata.json and fixes the digest every output embeds.
  void seal(const std::string& subcommand) {
    metadata_["tool"] = "editaudit";
    metadata_["version"] = kVersion;
    metadata_["subcommand"] = subcommand;
    metadata_["thresholds"] = artifacts::to_json(thresholds_);
    json digests = json::object();
    for (const auto& [name, text] : prompts::all()) digests[name] = prompts::digest(name);
    metadata_["prompt_digests"] = digests;
    metadata_["aggregation"] = "micro";
    digest_ = report::metadata_digest(metadata_);
    report::write_report(out_dir(), "run_metadata", metadata_, std::nullopt, digest_);
  }

  void write(const std::string& stem, json data, const std::optional<report::Table>& table) {
    report::write_report(out_dir(), stem, std::move(data), table, digest_);
  }

 public:
  void set_thresholds(artifacts::ArtifactConfig c) { thresholds_ = c; }

 private:
  Options o_;
  std::ostream& out_;
  std::ostream& err_;
  std::shared_ptr<providers::Transport> transport_;
  std::optional<EditSet> edits_;
  std::optional<lexicon::NounLexicon> lex_;
  std::unique_ptr<providers::Provider> provider_;
  std::unique_ptr<providers::Judge> judge_;
  artifacts::ArtifactConfig thresholds_;
  json metadata_ = json::object();
  std::string digest_;
};

int Run::metrics() {
  if (o_.human.empty() || o_.model.empty()) throw UsageError("--human and --model are required");
  const auto human = read_captions(o_.human);
  const auto model = read_captions(o_.model);
  note_input("human", o_.human);
  note_input("model", o_.model);
  std::vector<std::string> ids;
  for (const auto& [id, e] : human) {
    if (!model.contains(id)) throw Error("edit " + id + " has human captions but no model captions");
    ids.push_back(id);
  }
  for (const auto& [id, e] : model)
    if (!human.contains(id)) throw Error("edit " + id + " has model captions but no human captions");

  const bool need_extraction = std::any_of(human.begin(), human.end(), [](const auto& p) { return !p.second.triplets; }) ||
                               std::any_of(model.begin(), model.end(), [](const auto& p) { return !p.second.triplets; });
  if (need_extraction) provider();
  auto& j = judge();
  const auto model_name = o_.model_name.empty() ? std::string("model") : o_.model_name;
  metadata_["model_name"] = model_name;
  seal("metrics");

  struct EditResult {
    triplets::TripletSet h;
    triplets::TripletSet m;
    triplets::EditCounts counts;
    std::optional<bool> main_difference;
  };
  auto triplets_of = [&](const CaptionEntry& e, const std::string& id, triplets::Origin origin) {
    if (e.triplets) return triplets::TripletSet{id, origin, *e.triplets};
    return triplets::extract_triplets(*e.caption, id, origin, *provider_);
  };
  const auto results = parallel_map(ids.size(), workers(), [&](std::size_t i) {
    const auto& id = ids[i];
    const auto& he = human.at(id);
    const auto& me = model.at(id);
    EditResult r;
    r.h = triplets_of(he, id, triplets::Origin::Human);
    r.m = triplets_of(me, id, triplets::Origin::Model);
    r.counts = triplets::count_edit(r.h, r.m, j);
    if (he.caption && me.caption && !triplets::is_no_difference_caption(*he.caption))
      r.main_difference = harness::eval_main_difference(*me.caption, *he.caption, j);
    return r;
  });

  std::vector<triplets::EditCounts> counts;
  std::size_t md_total = 0;
  std::size_t md_same = 0;
  json per_edit = json::array();
  report::Table table{"Difference triplet metrics: " + model_name,
                      {"Edit", "|H|", "|M|", "MP", "HR", "MP_soft", "HR_soft"},
                      {}};
  for (const auto& r : results) {
    counts.push_back(r.counts);
    const auto m = triplets::compute_metrics(r.counts);
    json jh = json::array();
    json jm = json::array();
    for (const auto& t : r.h.triplets) jh.push_back(triplet_json(t));
    for (const auto& t : r.m.triplets) jm.push_back(triplet_json(t));
    auto rec = report::to_json(m);
    rec["id"] = r.counts.edit_id;
    rec["human_triplets"] = jh;
    rec["model_triplets"] = jm;
    rec["main_difference"] = r.main_difference ? json(*r.main_difference) : json(nullptr);
    per_edit.push_back(rec);
    if (r.main_difference) {
      ++md_total;
      md_same += *r.main_difference ? 1 : 0;
    }
    table.rows.push_back({r.counts.edit_id, std::to_string(r.counts.h), std::to_string(r.counts.m),
                          report::format_number(m.mp, 2), report::format_number(m.hr, 2),
                          report::format_number(m.mp_soft, 2), report::format_number(m.hr_soft, 2)});
  }
  const auto corpus = triplets::aggregate(counts);
  table.rows.push_back({"corpus", std::to_string(corpus.h_count), std::to_string(corpus.m_count),
                        report::format_number(corpus.mp, 2), report::format_number(corpus.hr, 2),
                        report::format_number(corpus.mp_soft, 2), report::format_number(corpus.hr_soft, 2)});
  std::optional<double> md;
  if (md_total > 0) md = 100.0 * static_cast<double>(md_same) / static_cast<double>(md_total);
  write("metrics",
        {{"model", model_name},
         {"edits", per_edit},
         {"corpus", report::to_json(corpus)},
         {"main_difference", md ? json(*md) : json(nullptr)}},
        table);
  out_ << report::render_text(table);
  return 0;
}

int Run::artifacts_cmd() {
  if (o_.exports.empty()) throw UsageError("--exports is required");
  const auto& set = edits();
  std::map<std::string, pipeline::PipelineMetadata> meta;
  if (!o_.pipeline.empty()) {
    meta = read_pipeline_output(o_.pipeline);
    note_input("pipeline", o_.pipeline);
    lex();
  }
  seal("artifacts");

  const fs::path dir = o_.exports;
  json records = json::array();
  report::Table table{"Artifact findings", {"Edit", "Score drop", "Secondary", "Verdict"}, {}};
  std::size_t flagged = 0;
  for (const auto& e : set.records) {
    const auto src = artifacts::load_export(dir / (e.id + ".source.json"));
    const auto tgt = artifacts::load_export(dir / (e.id + ".edited.json"));
    const auto mask = geometry::read_mask(e.edit_mask);
    auto findings = artifacts::detect_score_drop(src, tgt, mask, thresholds_);
    const auto drops = findings.size();
    if (const auto it = meta.find(e.id); it != meta.end()) {
      const auto& m = it->second;
      const bool add = m.action == ActionType::Add;
      if (add || m.action == ActionType::Remove) {
        const auto& main = add ? m.target_object : m.source_object;
        const artifacts::MainBoxes boxes{artifacts::main_object_boxes(src, main, *lex_),
                                         artifacts::main_object_boxes(tgt, main, *lex_)};
        auto extra = artifacts::detect_secondary_changes(src, tgt, mask, boxes, main, m.action, *lex_);
        findings.insert(findings.end(), extra.begin(), extra.end());
      }
    }
    const bool verdict = artifacts::artifact_verdict(findings);
    flagged += verdict ? 1 : 0;
    json jf = json::array();
    for (const auto& f : findings) jf.push_back(artifacts::to_json(f));
    records.push_back({{"id", e.id}, {"artifact", verdict}, {"findings", jf}});
    table.rows.push_back({e.id, std::to_string(drops), std::to_string(findings.size() - drops),
                          verdict ? "artifact" : "clean"});
  }
  write("artifacts",
        {{"config", artifacts::to_json(thresholds_)}, {"edits", records}, {"flagged", flagged}},
        table);
  out_ << report::render_text(table);
  return 0;
}

int Run::pipeline_cmd() {
  const auto& set = edits();
  auto& p = provider();
  const auto& l = lex();
  seal("pipeline");

  struct Outcome {
    std::optional<pipeline::PipelineMetadata> meta;
    std::string error;
  };
  const auto outcomes = parallel_map(set.records.size(), workers(), [&](std::size_t i) {
    try {
      return Outcome{pipeline::run_pipeline(set.records[i], p, l), {}};
    } catch (const pipeline::PipelineError& e) {
      return Outcome{std::nullopt, e.what()};
    }
  });

  std::vector<pipeline::PipelineMetadata> runs;
  json records = json::array();
  json failures = json::array();
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (outcomes[i].meta) {
      runs.push_back(*outcomes[i].meta);
      records.push_back(pipeline::to_json(*outcomes[i].meta));
    } else {
      failures.push_back({{"id", set.records[i].id}, {"error", outcomes[i].error}});
      err_ << "warning: " << set.records[i].id << ": " << outcomes[i].error << '\n';
    }
  }
  const auto d = pipeline::distribution(runs);
  report::Table table{"Action distribution (N=" + std::to_string(d.total) + ")", {"Action", "Count", "%"}, {}};
  json jd = json::object();
  for (auto a : kAllActions) {
    const auto n = d.counts.at(a);
    std::optional<double> pct;
    if (d.total > 0) pct = d.percent(a);
    table.rows.push_back({std::string(to_string(a)), std::to_string(n), report::format_number(pct, 1)});
    jd[std::string(to_string(a))] = {{"count", n}, {"percent", pct ? json(*pct) : json(nullptr)}};
  }
  write("pipeline", {{"records", records}, {"failures", failures}, {"distribution", jd}}, table);
  out_ << report::render_text(table);
  return 0;
}

int Run::inspect() {
  const auto& set = edits();
  auto& p = provider();
  std::vector<harness::QuestionKind> questions;
  if (o_.questions.empty()) {
    questions.assign(harness::kAllQuestions.begin(), harness::kAllQuestions.end());
  } else {
    for (const auto& q : split_list(o_.questions)) questions.push_back(harness::parse_question(q));
  }
  std::map<std::string, pipeline::PipelineMetadata> meta;
  if (!o_.pipeline.empty()) {
    meta = read_pipeline_output(o_.pipeline);
    note_input("pipeline", o_.pipeline);
  }
  const bool wants_caption =
      std::find(questions.begin(), questions.end(), harness::QuestionKind::DiffCaptionAccuracy) != questions.end();
  if (wants_caption && meta.empty()) {
    err_ << "warning: no --pipeline captions; skipping diff_caption_accuracy\n";
    std::erase(questions, harness::QuestionKind::DiffCaptionAccuracy);
  }
  std::optional<harness::LabelSet> labels;
  if (!o_.labels.empty()) {
    labels = annotate::load_labels(o_.labels);
    note_input("labels", o_.labels);
  }
  const auto slice_names = split_list(o_.slices);
  for (const auto& s : slice_names)
    if (s != "action" && s != "consistency") throw UsageError("unknown slice: " + s + " (action, consistency)");
  const auto model_name = o_.model_name.empty() ? p.config().model_name : o_.model_name;
  metadata_["model_name"] = model_name;
  json jq = json::array();
  for (auto q : questions) jq.push_back(to_string(q));
  metadata_["questions"] = jq;
  metadata_["slices"] = slice_names;
  seal("inspect");

  const auto answers = parallel_map(set.records.size(), workers(), [&](std::size_t i) {
    const auto& e = set.records[i];
    std::map<harness::QuestionKind, bool> a;
    for (auto q : questions) {
      std::optional<std::string> caption;
      if (q == harness::QuestionKind::DiffCaptionAccuracy) {
        const auto it = meta.find(e.id);
        if (it == meta.end()) continue;
        caption = it->second.short_caption;
      }
      a[q] = harness::ask_question(e, q, p, caption);
    }
    return a;
  });

  harness::Predictions preds;
  json jp = json::object();
  for (std::size_t i = 0; i < answers.size(); ++i) {
    preds[set.records[i].id] = answers[i];
    json row = json::object();
    for (const auto& [q, v] : answers[i]) row[std::string(to_string(q))] = v ? "yes" : "no";
    jp[set.records[i].id] = row;
  }
  write("predictions", {{"model", model_name}, {"predictions", jp}}, std::nullopt);

  if (!labels) {
    out_ << "wrote predictions for " << preds.size() << " edits\n";
    return 0;
  }
  harness::SliceKeys slices;
  for (const auto& e : set.records) {
    for (const auto& s : slice_names) {
      if (s == "action") {
        if (const auto it = meta.find(e.id); it != meta.end())
          slices[e.id].push_back("action=" + std::string(to_string(it->second.action)));
      } else if (const auto it = labels->find(e.id); it != labels->end() && it->second.visually_consistent) {
        slices[e.id].push_back(*it->second.visually_consistent ? "consistency=consistent"
                                                               : "consistency=inconsistent");
      }
    }
  }
  const auto scores = harness::score(model_name, preds, *labels, slices);
  report::Table table{"Inspector scores: " + model_name, {"Scope", "Question", "N", "Accuracy", "Balanced"}, {}};
  auto add_rows = [&](const std::string& scope, const std::map<harness::QuestionKind, harness::QuestionScore>& qs) {
    for (const auto& [q, s] : qs)
      table.rows.push_back({scope, std::string(to_string(q)), std::to_string(s.evaluated),
                            report::format_number(s.accuracy, 1), report::format_number(s.balanced_accuracy, 1)});
  };
  add_rows("overall", scores.overall);
  for (const auto& [key, qs] : scores.slices) add_rows(key, qs);
  write("scores", harness::to_json(scores), table);
  out_ << report::render_text(table);
  return 0;
}

int Run::augment_cmd() {
  if (o_.pipeline.empty()) throw UsageError("--pipeline is required");
  const auto& set = edits();
  const auto meta = read_pipeline_output(o_.pipeline);
  note_input("pipeline", o_.pipeline);
  auto& p = provider();
  const auto& l = lex();
  seal("augment");

  std::vector<augment::TrainingInstance> originals;
  std::map<std::string, augment::NegativeContext> contexts;
  for (const auto& e : set.records) {
    const auto it = meta.find(e.id);
    if (it == meta.end()) {
      err_ << "warning: " << e.id << ": no pipeline metadata, skipped\n";
      continue;
    }
    originals.push_back(augment::make_original(e, it->second));
    if (o_.exports.empty()) continue;
    const auto src = artifacts::load_export(fs::path(o_.exports) / (e.id + ".source.json"));
    augment::NegativeContext ctx;
    for (const auto& obj : src.objects) ctx.scene.push_back({obj.label, obj.bbox.area()});
    if (!it->second.source_object.empty()) {
      long long best = 0;
      for (const auto& b : artifacts::main_object_boxes(src, it->second.source_object, l))
        best = std::max(best, b.area());
      if (best > 0) ctx.object_area = best;
    }
    contexts.emplace(e.id, std::move(ctx));
  }
  const auto result = augment::expand(originals, contexts, p, l);
  augment::write_training_manifest(result.instances, out_dir() / "training.jsonl");

  report::Table table{"Training instances", {"Lineage", "Count"}, {}};
  json counts = json::object();
  for (auto lin : {augment::Lineage::Original, augment::Lineage::Reversed, augment::Lineage::Negative,
                   augment::Lineage::ReversedNegative}) {
    table.rows.push_back({std::string(to_string(lin)), std::to_string(result.count(lin))});
    counts[std::string(to_string(lin))] = result.count(lin);
  }
  table.rows.push_back({"total", std::to_string(result.instances.size())});
  json failures = json::array();
  for (const auto& f : result.failures)
    failures.push_back({{"id", f.edit_id}, {"lineage", to_string(f.lineage)}, {"reason", f.reason}});
  write("augment",
        {{"counts", counts},
         {"total", result.instances.size()},
         {"training_manifest_sha256", file_digest(out_dir() / "training.jsonl")},
         {"failures", failures}},
        table);
  out_ << report::render_text(table);
  return 0;
}

int Run::serve() {
  if (o_.store.empty()) throw UsageError("--store is required");
  const auto annotators = split_list(o_.annotators);
  if (annotators.empty()) throw UsageError("--annotators is required");
  const auto& set = edits();
  annotate::ServerOptions opts;
  if (!o_.static_dir.empty()) opts.static_dir = o_.static_dir;
  if (!o_.pipeline.empty())
    for (const auto& [id, m] : read_pipeline_output(o_.pipeline)) opts.captions[id] = m.short_caption;
  if (!o_.out.empty()) seal("serve");

  std::vector<std::string> ids;
  for (const auto& e : set.records) ids.push_back(e.id);
  annotate::AnnotationStore store(o_.store, ids, annotators, o_.cap);
  annotate::AnnotateServer server(store, set, opts);
  out_ << "serving " << ids.size() << " edits on http://" << o_.host << ':' << o_.port << '\n' << std::flush;
  server.listen(o_.host, o_.port);
  return 0;
}

int Run::report_cmd() {
  std::optional<std::map<std::string, harness::MajorityAnswers>> majority;
  if (!o_.labels.empty()) {
    majority = annotate::load_majority_answers(o_.labels);
    note_input("labels", o_.labels);
  }
  std::vector<report::ModelColumn> columns;
  auto column = [&](const std::string& model) -> report::ModelColumn& {
    for (auto& c : columns)
      if (c.model == model) return c;
    columns.push_back({model, std::nullopt, std::nullopt, std::nullopt});
    return columns.back();
  };
  for (const auto& f : o_.score_files) {
    const auto j = read_json_file(f);
    note_input("scores:" + f, f);
    column(j.at("model").get<std::string>()).scores = report::score_report_from_json(j);
  }
  for (const auto& f : o_.metric_files) {
    const auto j = read_json_file(f);
    note_input("metrics:" + f, f);
    auto& c = column(j.at("model").get<std::string>());
    c.metrics = report::metric_report_from_json(j.at("corpus"));
    if (!j.at("main_difference").is_null()) c.main_difference = j.at("main_difference").get<double>();
  }
  if (!majority && columns.empty()) throw UsageError("report needs --labels, --scores or --metrics");
  seal("report");

  if (majority) {
    std::vector<harness::MajorityAnswers> answers;
    for (const auto& [id, a] : *majority) answers.push_back(a);
    const auto r = report::emit_distribution(answers);
    write("distribution", r.data, r.table);
    out_ << report::render_text(r.table);
  }
  if (!columns.empty()) {
    const auto r = report::emit_comparison(columns);
    write("comparison", r.data, r.table);
    out_ << report::render_text(r.table);
  }
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err,
        std::shared_ptr<providers::Transport> transport) {
  CLI::App app{"Audit instruction-guided image edits", "editaudit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--out", o.out, "Output directory");
    sub->add_option("--lexicon", o.lexicon, "WordNet directory")->capture_default_str();
  };
  auto provider_opts = [&](CLI::App* sub) {
    sub->add_option("--provider", o.provider, "Provider config JSON");
    sub->add_option("--cassettes", o.cassettes, "Cassette directory");
    sub->add_option("--mode", o.mode, "Cassette mode")
        ->check(CLI::IsMember({"live", "record", "replay"}))
        ->capture_default_str();
  };

  auto* metrics = app.add_subcommand("metrics", "Difference-triplet MP/HR between human and model captions");
  common(metrics);
  provider_opts(metrics);
  metrics->add_option("--human", o.human, "Human captions or triplets (JSONL)");
  metrics->add_option("--model", o.model, "Model captions or triplets (JSONL)");
  metrics->add_option("--model-name", o.model_name, "Column name for the model");
  metrics->add_option("--judge", o.judge, "Similarity judge")
      ->check(CLI::IsMember({"llm", "lexical"}))
      ->capture_default_str();

  auto* arts = app.add_subcommand("artifacts", "Flag artifacts from object-detection exports");
  common(arts);
  arts->add_option("--manifest", o.manifest, "Edit manifest (JSONL)");
  arts->add_option("--exports", o.exports, "Directory of <id>.source.json / <id>.edited.json");
  arts->add_option("--pipeline", o.pipeline, "Pipeline output, enables the secondary-object method");
  arts->add_option("--thresholds", o.thresholds, "key=value,... or a JSON file");

  auto* pipe = app.add_subcommand("pipeline", "Generate edit metadata and captions");
  common(pipe);
  provider_opts(pipe);
  pipe->add_option("--manifest", o.manifest, "Edit manifest (JSONL)");

  auto* insp = app.add_subcommand("inspect", "Ask the inspector questions and score against labels");
  common(insp);
  provider_opts(insp);
  insp->add_option("--manifest", o.manifest, "Edit manifest (JSONL)");
  insp->add_option("--questions", o.questions, "Comma-separated question names");
  insp->add_option("--labels", o.labels, "Exported annotation labels");
  insp->add_option("--pipeline", o.pipeline, "Pipeline output (captions, action slices)");
  insp->add_option("--slices", o.slices, "Comma-separated: action, consistency");
  insp->add_option("--model-name", o.model_name, "Report name; defaults to the provider model");

  auto* aug = app.add_subcommand("augment", "Expand edits with reversed and negative instances");
  common(aug);
  provider_opts(aug);
  aug->add_option("--manifest", o.manifest, "Edit manifest (JSONL)");
  aug->add_option("--pipeline", o.pipeline, "Pipeline output");
  aug->add_option("--exports", o.exports, "Detection exports for scene objects");

  auto* srv = app.add_subcommand("serve", "Run the annotation service");
  common(srv);
  srv->add_option("--manifest", o.manifest, "Edit manifest (JSONL)");
  srv->add_option("--store", o.store, "Annotation log (JSONL, append-only)");
  srv->add_option("--annotators", o.annotators, "Comma-separated annotator ids");
  srv->add_option("--host", o.host)->capture_default_str();
  srv->add_option("--port", o.port)->capture_default_str();
  srv->add_option("--static", o.static_dir, "UI bundle directory");
  srv->add_option("--pipeline", o.pipeline, "Pipeline output used to pre-fill captions");
  srv->add_option("--cap", o.cap, "Annotations per edit")->capture_default_str();

  auto* rep = app.add_subcommand("report", "Label distribution and model comparison tables");
  common(rep);
  rep->add_option("--labels", o.labels, "Exported annotation labels");
  rep->add_option("--scores", o.score_files, "Score files from inspect");
  rep->add_option("--metrics", o.metric_files, "Metric files from metrics");

  if (argc > 1 && argv[1][0] != '-' && app.get_subcommand_no_throw(argv[1]) == nullptr) {
    err << "unknown subcommand: " << argv[1] << "\nRun with --help for more information.\n";
    return 2;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    Run r(o, out, err, std::move(transport));
    if (arts->parsed()) {
      r.set_thresholds(parse_thresholds(o.thresholds));
      return r.artifacts_cmd();
    }
    if (metrics->parsed()) return r.metrics();
    if (pipe->parsed()) return r.pipeline_cmd();
    if (insp->parsed()) return r.inspect();
    if (aug->parsed()) return r.augment_cmd();
    if (srv->parsed()) return r.serve();
    if (rep->parsed()) return r.report_cmd();
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace editaudit::cli
