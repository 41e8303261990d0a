// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "editaudit/core/types.hpp"
#include "editaudit/providers/judge.hpp"
#include "editaudit/providers/provider.hpp"

namespace editaudit::triplets {

/// Provider reply does not have the line structure we asked for.
class FormatError : public Error {
 public:
  using Error::Error;
};

enum class Origin { Human, Model };

struct TripletSet {
  std::string edit_id;
  Origin origin = Origin::Model;
  std::vector<DifferenceTriplet> triplets;
};

/// Parses "ACTION | SOURCE | TARGET" lines ("none" for an absent object,
/// a lone NONE for no changes). List markers are tolerated. Throws
/// FormatError on structure problems and ParseError on an unknown action.
std::vector<DifferenceTriplet> parse_triplet_lines(std::string_view reply);

/// True for captions that only say nothing changed ("No differences.").
bool is_no_difference_caption(std::string_view caption);

/// Asks the provider for one line per change. A reply that cannot be read
/// gets one retry with a stricter prompt; an unknown action is not retried.
TripletSet extract_triplets(std::string_view caption, std::string edit_id, Origin origin,
                            providers::Provider& provider);

enum class MatchMode { Strict, Soft };
std::string_view to_string(MatchMode m);

/// Strict: equal actions, source~source, target~target (absent matches only
/// absent). Soft additionally accepts source~target and target~source.
bool triplet_match(const DifferenceTriplet& h, const DifferenceTriplet& m,
                   providers::Judge& judge, MatchMode mode);

struct Matching {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (index in H, index in M)
  MatchMode mode = MatchMode::Strict;
};

/// Maximum one-to-one matching (augmenting paths over H in order).
Matching match_sets(std::span<const DifferenceTriplet> h, std::span<const DifferenceTriplet> m,
                    providers::Judge& judge, MatchMode mode);

struct EditCounts {
  std::string edit_id;
  std::size_t h = 0;
  std::size_t m = 0;
  std::size_t matched = 0;
  std::size_t matched_soft = 0;
};

EditCounts count_edit(const TripletSet& h, const TripletSet& m, providers::Judge& judge);

/// Percentages in [0,100]. mp is absent when no edit has human triplets,
/// hr when no edit has model triplets.
struct MetricReport {
  std::optional<double> mp;
  std::optional<double> hr;
  std::optional<double> mp_soft;
  std::optional<double> hr_soft;
  std::size_t h_count = 0;
  std::size_t m_count = 0;
  std::size_t matched = 0;
  std::size_t matched_soft = 0;
  std::size_t edits = 0;
  double avg_diffs_per_edit = 0;
  double no_diff_rate = 0;
};

MetricReport compute_metrics(const EditCounts& counts);
/// Micro average: counts are summed before dividing. Edits with no human
/// triplets leave MP untouched; edits with no model triplets leave HR
/// untouched and raise no_diff_rate.
MetricReport aggregate(std::span<const EditCounts> edits);

/// First sentence or clause that states a change, skipping preambles such
/// as "The images differ as follows:".
std::string extract_main_difference(std::string_view caption);

}  // namespace editaudit::triplets
