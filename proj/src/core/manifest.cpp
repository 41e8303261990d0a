// SPDX-License-Identifier: Apache-2.0
#include "editaudit/core/manifest.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "editaudit/core/digest.hpp"
#include "editaudit/core/image.hpp"
#include "editaudit/core/text.hpp"

namespace editaudit {

namespace fs = std::filesystem;
using nlohmann::json;

bool ValidationReport::has(std::string_view code) const {
  return std::any_of(violations.begin(), violations.end(),
                     [&](const Violation& v) { return v.code == code; });
}

ValidationReport validate_edit(const EditRecord& record) {
  ValidationReport report;
  auto add = [&](std::string code, std::string detail) {
    report.violations.push_back({std::move(code), std::move(detail)});
  };
  if (text::trim(record.id).empty()) add("empty-id", "record id is empty");
  if (text::trim(record.instruction).empty()) add("empty-instruction", "instruction is empty");

  std::optional<Dimensions> source_dims;
  try {
    source_dims = image_dimensions(record.source_image);
  } catch (const ImageError& e) {
    add("source-unreadable", e.what());
  }
  try {
    image_dimensions(record.edited_image);
  } catch (const ImageError& e) {
    add("edited-unreadable", e.what());
  }
  try {
    const auto mask_dims = image_dimensions(record.edit_mask);
    if (source_dims && !(mask_dims == *source_dims)) {
      add("mask-dimension-mismatch",
          "mask is " + std::to_string(mask_dims.width) + "x" + std::to_string(mask_dims.height) +
              ", source is " + std::to_string(source_dims->width) + "x" +
              std::to_string(source_dims->height));
    }
  } catch (const ImageError& e) {
    add("mask-unreadable", e.what());
  }
  return report;
}

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ManifestError("manifest not found: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string required_string(const json& j, const char* key, std::size_t line_no) {
  if (!j.contains(key) || !j[key].is_string())
    throw ManifestError("line " + std::to_string(line_no) + ": missing string field '" + key + "'");
  return j[key].get<std::string>();
}

}  // namespace

EditSet load_manifest(const fs::path& path) {
  const std::string content = read_file(path);
  const fs::path base = path.parent_path().empty() ? fs::path(".") : path.parent_path();

  EditSet set;
  set.manifest_path = path;
  set.manifest_sha256 = sha256_hex(content);

  std::map<std::string, std::size_t> first_line;
  std::istringstream lines(content);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ManifestError("line " + std::to_string(line_no) + ": malformed record: " + e.what());
    }
    if (!j.is_object())
      throw ManifestError("line " + std::to_string(line_no) + ": record is not an object");

    EditRecord rec;
    rec.id = required_string(j, "id", line_no);
    rec.source_image = (base / required_string(j, "source", line_no)).lexically_normal();
    rec.edited_image = (base / required_string(j, "edited", line_no)).lexically_normal();
    rec.edit_mask = (base / required_string(j, "mask", line_no)).lexically_normal();
    rec.instruction = required_string(j, "instruction", line_no);
    rec.editor_tag = required_string(j, "editor", line_no);

    if (auto [it, inserted] = first_line.emplace(rec.id, line_no); !inserted) {
      throw ManifestError("duplicate id '" + rec.id + "' on lines " + std::to_string(it->second) +
                          " and " + std::to_string(line_no));
    }
    for (const auto* p : {&rec.source_image, &rec.edited_image, &rec.edit_mask}) {
      if (!fs::exists(*p))
        throw ManifestError("line " + std::to_string(line_no) + ": unresolvable reference " +
                            p->string());
    }
    const auto report = validate_edit(rec);
    if (!report.ok()) {
      std::string codes;
      for (const auto& v : report.violations) codes += (codes.empty() ? "" : ", ") + v.code;
      throw ManifestError("line " + std::to_string(line_no) + ": invalid record '" + rec.id +
                          "': " + codes);
    }
    set.records.push_back(std::move(rec));
  }
  return set;
}

void write_manifest(const EditSet& set, const fs::path& path) {
  const fs::path base = fs::absolute(path.parent_path().empty() ? fs::path(".") : path.parent_path());
  auto rel = [&](const fs::path& p) {
    return fs::absolute(p).lexically_normal().lexically_relative(base.lexically_normal()).generic_string();
  };
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ManifestError("cannot write manifest: " + path.string());
  for (const auto& r : set.records) {
    json j = json::object();
    j["id"] = r.id;
    j["source"] = rel(r.source_image);
    j["edited"] = rel(r.edited_image);
    j["mask"] = rel(r.edit_mask);
    j["instruction"] = r.instruction;
    j["editor"] = r.editor_tag;
    out << j.dump() << '\n';
  }
}

}  // namespace editaudit
