// SPDX-License-Identifier: Apache-2.0
#include "editaudit/lexicon/lexicon.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "editaudit/core/digest.hpp"
#include "editaudit/core/text.hpp"

namespace editaudit::lexicon {

namespace fs = std::filesystem;

namespace {

const std::unordered_set<std::string>& stoplist() {
  static const std::unordered_set<std::string> kWords = {
      // determiners and pronouns
      "a", "an", "the", "this", "that", "these", "those", "it", "its", "they", "them", "their",
      "he", "she", "him", "her", "his", "we", "us", "our", "you", "your", "i", "me", "my",
      "some", "any", "each", "every", "all", "both", "one", "ones", "another", "other",
      // light nouns that ground nothing
      "thing", "things", "image", "picture", "photo", "photograph", "side", "part", "area",
      "region", "object", "something", "lot", "kind", "type", "bit", "way", "edit",
      "difference", "version"};
  return kWords;
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw LexiconError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct IndexLine {
  std::string lemma;
  int tagged = 0;
  std::vector<std::string> offsets;
};

// lemma pos synset_cnt p_cnt [ptr_symbol...] sense_cnt tagsense_cnt synset_offset...
IndexLine parse_index_line(const std::string& line, const fs::path& file, std::size_t line_no) {
  std::istringstream in(line);
  IndexLine out;
  std::string pos;
  int synset_cnt = 0, p_cnt = 0, sense_cnt = 0;
  if (!(in >> out.lemma >> pos >> synset_cnt >> p_cnt))
    throw LexiconError(file.string() + ":" + std::to_string(line_no) + ": malformed index line");
  std::string skip;
  for (int i = 0; i < p_cnt; ++i) in >> skip;
  if (!(in >> sense_cnt >> out.tagged))
    throw LexiconError(file.string() + ":" + std::to_string(line_no) + ": malformed index line");
  for (int i = 0; i < synset_cnt; ++i) {
    std::string off;
    if (!(in >> off))
      throw LexiconError(file.string() + ":" + std::to_string(line_no) + ": missing synset offset");
    out.offsets.push_back(off);
  }
  return out;
}

}  // namespace

NounLexicon NounLexicon::load(const fs::path& dir) {
  NounLexicon lex;
  const auto index_path = dir / "index.noun";
  const auto data_path = dir / "data.noun";
  if (!fs::exists(index_path) || !fs::exists(data_path))
    throw LexiconError("no WordNet noun database (index.noun, data.noun) in " + dir.string());

  const std::string data = read_text(data_path);
  std::string wn_version = "WordNet";
  {
    std::istringstream lines(data);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(lines, line)) {
      ++line_no;
      if (line.starts_with("  ")) {
        if (auto p = line.find("WordNet "); p != std::string::npos && wn_version == "WordNet") {
          std::istringstream h(line.substr(p + 8));
          std::string v;
          h >> v;
          if (!v.empty() && std::isdigit(static_cast<unsigned char>(v[0]))) wn_version += " " + v;
        }
        continue;
      }
      if (line.empty()) continue;
      // offset lex_filenum ss_type w_cnt word lex_id [word lex_id...] ...
      std::istringstream in(line);
      std::string offset, lex_filenum, ss_type, w_cnt_hex;
      if (!(in >> offset >> lex_filenum >> ss_type >> w_cnt_hex))
        throw LexiconError(data_path.string() + ":" + std::to_string(line_no) + ": malformed synset");
      const int w_cnt = std::stoi(w_cnt_hex, nullptr, 16);
      std::vector<std::string> words;
      for (int i = 0; i < w_cnt; ++i) {
        std::string word, lex_id;
        if (!(in >> word >> lex_id))
          throw LexiconError(data_path.string() + ":" + std::to_string(line_no) + ": truncated synset");
        // adjective markers like "(p)" only occur in data.adj, strip defensively
        if (auto paren = word.find('('); paren != std::string::npos) word.resize(paren);
        words.push_back(text::to_lower(word));
      }
      lex.synsets_.emplace(offset, std::move(words));
    }
  }

  const std::string index = read_text(index_path);
  {
    std::istringstream lines(index);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(lines, line)) {
      ++line_no;
      if (line.starts_with("  ") || line.empty()) continue;
      auto entry = parse_index_line(line, index_path, line_no);
      for (const auto& off : entry.offsets) {
        if (!lex.synsets_.contains(off))
          throw LexiconError(index_path.string() + ":" + std::to_string(line_no) + ": synset " +
                             off + " of '" + entry.lemma + "' missing from data.noun");
      }
      lex.noun_tagged_[entry.lemma] = entry.tagged;
      lex.index_[entry.lemma] = std::move(entry.offsets);
    }
  }

  for (const char* other : {"index.verb", "index.adj", "index.adv"}) {
    const auto p = dir / other;
    if (!fs::exists(p)) continue;
    lex.have_other_pos_ = true;
    std::istringstream lines(read_text(p));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(lines, line)) {
      ++line_no;
      if (line.starts_with("  ") || line.empty()) continue;
      auto entry = parse_index_line(line, p, line_no);
      auto& t = lex.other_tagged_[entry.lemma];
      t = std::max(t, entry.tagged);
    }
  }

  if (const auto exc = dir / "noun.exc"; fs::exists(exc)) {
    std::istringstream lines(read_text(exc));
    std::string line;
    while (std::getline(lines, line)) {
      std::istringstream in(line);
      std::string inflected, base;
      if (in >> inflected >> base) lex.exceptions_.emplace(inflected, base);
    }
  }

  lex.version_ = wn_version + " index:" + sha256_hex(index).substr(0, 12);
  return lex;
}

bool NounLexicon::in_index(std::string_view lemma) const {
  return index_.contains(std::string(lemma));
}

bool NounLexicon::is_noun(std::string_view lemma) const {
  const std::string key(lemma);
  auto it = noun_tagged_.find(key);
  if (it == noun_tagged_.end()) return false;
  if (!have_other_pos_) return true;
  auto other = other_tagged_.find(key);
  return other == other_tagged_.end() || it->second >= other->second;
}

bool NounLexicon::is_stopword(std::string_view lemma) const {
  return stoplist().contains(std::string(lemma));
}

std::string NounLexicon::lemmatize(std::string_view word) const {
  const std::string w = text::to_lower(word);
  if (auto it = exceptions_.find(w); it != exceptions_.end()) return it->second;
  if (in_index(w)) return w;
  struct Rule {
    std::string_view suffix;
    std::string_view replacement;
  };
  static constexpr Rule kRules[] = {{"ies", "y"}, {"ses", "s"}, {"xes", "x"},  {"zes", "z"},
                                    {"ches", "ch"}, {"shes", "sh"}, {"men", "man"}, {"s", ""}};
  for (const auto& r : kRules) {
    if (w.size() > r.suffix.size() && w.ends_with(r.suffix)) {
      std::string base = w.substr(0, w.size() - r.suffix.size()) + std::string(r.replacement);
      if (in_index(base)) return base;
    }
  }
  return w;
}

std::span<const std::string> NounLexicon::synsets(std::string_view lemma) const {
  auto it = index_.find(std::string(lemma));
  if (it == index_.end()) return {};
  return it->second;
}

std::span<const std::string> NounLexicon::members(std::string_view synset) const {
  auto it = synsets_.find(std::string(synset));
  if (it == synsets_.end()) return {};
  return it->second;
}

bool NounLexicon::share_synset(std::string_view a, std::string_view b) const {
  const auto sa = synsets(a);
  const auto sb = synsets(b);
  for (const auto& x : sa)
    if (std::find(sb.begin(), sb.end(), x) != sb.end()) return true;
  return false;
}

std::vector<std::string> extract_nouns(std::string_view text, const NounLexicon& lex) {
  std::vector<std::string> out;
  for (const auto& token : text::word_tokens(text)) {
    if (lex.is_stopword(token)) continue;
    const auto lemma = lex.lemmatize(token);
    if (lex.is_stopword(lemma) || !lex.is_noun(lemma)) continue;
    if (std::find(out.begin(), out.end(), lemma) == out.end()) out.push_back(lemma);
  }
  return out;
}

std::size_t noun_overlap(std::span<const std::string> instruction_nouns,
                         std::span<const std::string> caption_nouns, const NounLexicon& lex) {
  std::size_t count = 0;
  std::vector<std::string> seen;
  for (const auto& n : instruction_nouns) {
    if (std::find(seen.begin(), seen.end(), n) != seen.end()) continue;
    seen.push_back(n);
    const bool hit = std::any_of(caption_nouns.begin(), caption_nouns.end(), [&](const auto& c) {
      return c == n || lex.share_synset(n, c);
    });
    if (hit) ++count;
  }
  return count;
}

std::string head_noun(std::string_view phrase, const NounLexicon& lex) {
  const auto tokens = text::word_tokens(phrase);
  if (tokens.empty()) return {};
  std::vector<std::string> lemmas;
  lemmas.reserve(tokens.size());
  for (const auto& t : tokens) lemmas.push_back(lex.lemmatize(t));
  for (auto it = lemmas.rbegin(); it != lemmas.rend(); ++it)
    if (!lex.is_stopword(*it) && lex.is_noun(*it)) return *it;
  for (auto it = lemmas.rbegin(); it != lemmas.rend(); ++it)
    if (lex.in_index(*it)) return *it;
  return lemmas.back();
}

bool lexical_similar(std::string_view a, std::string_view b, const NounLexicon& lex) {
  const auto ha = head_noun(a, lex);
  const auto hb = head_noun(b, lex);
  if (ha.empty() || hb.empty()) return false;
  return ha == hb || lex.share_synset(ha, hb);
}

}  // namespace editaudit::lexicon
