// SPDX-License-Identifier: Apache-2.0
#include "editaudit/triplets/triplets.hpp"

#include <algorithm>
#include <cctype>
#include <regex>

#include "editaudit/core/text.hpp"
#include "editaudit/pipeline/prompts.hpp"

namespace editaudit::triplets {

namespace {

std::string_view strip_list_marker(std::string_view line) {
  line = text::trim(line);
  std::size_t i = 0;
  if (!line.empty() && (line[0] == '-' || line[0] == '*' || line[0] == '+')) {
    i = 1;
  } else {
    while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
    if (i > 0 && i < line.size() && (line[i] == '.' || line[i] == ')')) ++i;
    else i = 0;
  }
  return text::trim(line.substr(i));
}

std::optional<std::string> object_field(std::string_view field) {
  auto f = std::string(text::trim(field));
  // models sometimes quote the phrases
  while (f.size() >= 2 && (f.front() == '"' || f.front() == '\'') && f.back() == f.front())
    f = f.substr(1, f.size() - 2);
  const auto lower = text::to_lower(f);
  if (lower.empty() || lower == "none" || lower == "n/a" || lower == "-" || lower == "null" ||
      lower == "\xe2\x88\x85")
    return std::nullopt;
  return text::normalize_phrase(f);
}

}  // namespace

std::vector<DifferenceTriplet> parse_triplet_lines(std::string_view reply) {
  std::vector<DifferenceTriplet> out;
  std::vector<std::string> lines;
  for (const auto& raw : text::split(reply, '\n'))
    if (!strip_list_marker(raw).empty()) lines.emplace_back(text::trim(raw));
  if (lines.empty()) throw FormatError("empty triplet reply");
  if (lines.size() == 1 && text::to_lower(strip_list_marker(lines[0])) == "none") return out;

  for (const auto& raw : lines) {
    const auto line = strip_list_marker(raw);
    const auto fields = text::split(line, '|');
    if (fields.size() != 3)
      throw FormatError("expected 'ACTION | SOURCE | TARGET', got \"" + std::string(line) + "\"");
    const auto action = parse_action(text::trim(fields[0]));
    try {
      out.emplace_back(object_field(fields[1]), object_field(fields[2]), action);
    } catch (const InvariantError& e) {
      throw FormatError("line \"" + std::string(line) + "\": " + e.what());
    }
  }
  return out;
}

bool is_no_difference_caption(std::string_view caption) {
  static const std::regex kNoDiff(
      R"(^\s*(there (are|is) )?no (visible |noticeable )?(differences?|changes?)( (found|detected|between the (two )?images))?\s*[.!]?\s*$)",
      std::regex::icase);
  return std::regex_match(std::string(caption), kNoDiff);
}

TripletSet extract_triplets(std::string_view caption, std::string edit_id, Origin origin,
                            providers::Provider& provider) {
  if (text::trim(caption).empty()) throw Error("extract_triplets: empty caption");
  TripletSet set{std::move(edit_id), origin, {}};
  if (is_no_difference_caption(caption)) return set;

  const auto c = std::string(text::trim(caption));
  const auto reply = provider.complete(text::fill_slots(prompts::get("extract_triplets"), {c}));
  try {
    set.triplets = parse_triplet_lines(reply);
  } catch (const FormatError&) {
    const auto retry =
        provider.complete(text::fill_slots(prompts::get("extract_triplets_retry"), {c}));
    try {
      set.triplets = parse_triplet_lines(retry);
    } catch (const FormatError& e) {
      throw FormatError("edit " + set.edit_id + ": unreadable triplets after retry: " + e.what());
    }
  }
  return set;
}

std::string_view to_string(MatchMode m) { return m == MatchMode::Strict ? "strict" : "soft"; }

namespace {

bool objects_similar(const std::optional<std::string>& a, const std::optional<std::string>& b,
                     providers::Judge& judge) {
  if (!a || !b) return !a && !b;
  return judge.object_similarity(*a, *b).match;
}

}  // namespace

bool triplet_match(const DifferenceTriplet& h, const DifferenceTriplet& m, providers::Judge& judge,
                   MatchMode mode) {
  if (h.action() != m.action()) return false;
  if (objects_similar(h.source(), m.source(), judge) &&
      objects_similar(h.target(), m.target(), judge))
    return true;
  if (mode == MatchMode::Strict) return false;
  return objects_similar(h.source(), m.target(), judge) &&
         objects_similar(h.target(), m.source(), judge);
}

Matching match_sets(std::span<const DifferenceTriplet> h, std::span<const DifferenceTriplet> m,
                    providers::Judge& judge, MatchMode mode) {
  std::vector<std::vector<std::size_t>> adj(h.size());
  for (std::size_t i = 0; i < h.size(); ++i)
    for (std::size_t j = 0; j < m.size(); ++j)
      if (triplet_match(h[i], m[j], judge, mode)) adj[i].push_back(j);

  constexpr auto kFree = static_cast<std::size_t>(-1);
  std::vector<std::size_t> owner(m.size(), kFree);  // owner[j] = index in H
  std::vector<char> seen;
  auto augment = [&](auto&& self, std::size_t i) -> bool {
    for (auto j : adj[i]) {
      if (seen[j]) continue;
      seen[j] = 1;
      if (owner[j] == kFree || self(self, owner[j])) {
        owner[j] = i;
        return true;
      }
    }
    return false;
  };
  for (std::size_t i = 0; i < h.size(); ++i) {
    seen.assign(m.size(), 0);
    augment(augment, i);
  }

  Matching out{{}, mode};
  for (std::size_t j = 0; j < m.size(); ++j)
    if (owner[j] != kFree) out.pairs.emplace_back(owner[j], j);
  std::sort(out.pairs.begin(), out.pairs.end());
  return out;
}

EditCounts count_edit(const TripletSet& h, const TripletSet& m, providers::Judge& judge) {
  EditCounts c;
  c.edit_id = h.edit_id;
  c.h = h.triplets.size();
  c.m = m.triplets.size();
  c.matched = match_sets(h.triplets, m.triplets, judge, MatchMode::Strict).pairs.size();
  c.matched_soft = match_sets(h.triplets, m.triplets, judge, MatchMode::Soft).pairs.size();
  return c;
}

MetricReport compute_metrics(const EditCounts& counts) {
  return aggregate(std::span<const EditCounts>(&counts, 1));
}

MetricReport aggregate(std::span<const EditCounts> edits) {
  MetricReport r;
  r.edits = edits.size();
  std::size_t h_for_mp = 0, m_for_hr = 0, matched_mp = 0, soft_mp = 0, matched_hr = 0, soft_hr = 0;
  std::size_t no_diff = 0;
  for (const auto& e : edits) {
    if (e.matched > std::min(e.h, e.m) || e.matched_soft > std::min(e.h, e.m))
      throw Error("edit " + e.edit_id + ": matching larger than its sets");
    r.h_count += e.h;
    r.m_count += e.m;
    r.matched += e.matched;
    r.matched_soft += e.matched_soft;
    if (e.h > 0) {
      h_for_mp += e.h;
      matched_mp += e.matched;
      soft_mp += e.matched_soft;
    }
    if (e.m > 0) {
      m_for_hr += e.m;
      matched_hr += e.matched;
      soft_hr += e.matched_soft;
    } else {
      ++no_diff;
    }
  }
  if (h_for_mp > 0) {
    r.mp = 100.0 * static_cast<double>(matched_mp) / static_cast<double>(h_for_mp);
    r.mp_soft = 100.0 * static_cast<double>(soft_mp) / static_cast<double>(h_for_mp);
  }
  if (m_for_hr > 0) {
    r.hr = 100.0 * static_cast<double>(m_for_hr - matched_hr) / static_cast<double>(m_for_hr);
    r.hr_soft = 100.0 * static_cast<double>(m_for_hr - soft_hr) / static_cast<double>(m_for_hr);
  }
  if (r.edits > 0) {
    r.avg_diffs_per_edit = static_cast<double>(r.m_count) / static_cast<double>(r.edits);
    r.no_diff_rate = 100.0 * static_cast<double>(no_diff) / static_cast<double>(r.edits);
  }
  return r;
}

namespace {

bool is_preamble(std::string_view segment) {
  const auto s = text::trim(segment);
  if (s.ends_with(':')) return true;
  static const std::regex kPreamble(
      R"(^(here (are|is) )?(the )?((main|key|notable|following) )?(differences?|changes?)( between (the )?(two )?images)?( (are|is|include|includes))?( as follows)?[.:]?$)"
      R"(|^(the )?(two )?images differ( as follows)?[.:]?$)",
      std::regex::icase);
  return std::regex_match(std::string(s), kPreamble);
}

}  // namespace

std::string extract_main_difference(std::string_view caption) {
  const auto whole = text::trim(caption);
  std::vector<std::string> segments;
  std::string cur;
  auto flush = [&] {
    auto t = std::string(text::trim(cur));
    if (!t.empty()) segments.push_back(t);
    cur.clear();
  };
  for (std::size_t i = 0; i < whole.size(); ++i) {
    const char c = whole[i];
    if (c == '\n') {
      flush();
      continue;
    }
    cur += c;
    const bool at_break = i + 1 == whole.size() || std::isspace(static_cast<unsigned char>(whole[i + 1]));
    if ((c == '.' || c == '!' || c == '?' || c == ':') && at_break) flush();
  }
  flush();
  for (const auto& seg : segments) {
    const auto body = strip_list_marker(seg);
    if (body.empty() || is_preamble(body)) continue;
    return std::string(body);
  }
  return std::string(whole);
}

}  // namespace editaudit::triplets
