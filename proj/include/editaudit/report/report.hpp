// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "editaudit/harness/harness.hpp"
#include "editaudit/triplets/triplets.hpp"

namespace editaudit::report {

struct Table {
  std::string title;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

/// Left-aligned first column, right-aligned value columns.
std::string render_text(const Table& t);

/// Fixed-point with the given decimals, "-" for an absent value.
std::string format_number(std::optional<double> v, int decimals);

/// Both renderings of one report, built from the same data.
struct Rendered {
  nlohmann::json data;
  Table table;
};

/// Majority-label distribution per category, one decimal. Answers without
/// a majority land in a "No majority" row.
Rendered emit_distribution(std::span<const harness::MajorityAnswers> answers);

struct ModelColumn {
  std::string model;
  std::optional<harness::ScoreReport> scores;
  std::optional<triplets::MetricReport> metrics;
  std::optional<double> main_difference;  // percent
};

/// Inspector questions (balanced accuracy), main difference, MP/HR and soft
/// variants, Avg. Diff and No Diffs; one column per model, two decimals.
Rendered emit_comparison(std::span<const ModelColumn> models);

nlohmann::json to_json(const triplets::MetricReport& r);
triplets::MetricReport metric_report_from_json(const nlohmann::json& j);
harness::ScoreReport score_report_from_json(const nlohmann::json& j);

/// sha256 of the compact JSON dump.
std::string metadata_digest(const nlohmann::json& metadata);

/// Writes <stem>.json (data plus "run_metadata_digest") and, when a table
/// is given, <stem>.txt with a trailing digest line.
void write_report(const std::filesystem::path& dir, const std::string& stem,
                  nlohmann::json data, const std::optional<Table>& table,
                  const std::string& digest);

}  // namespace editaudit::report
