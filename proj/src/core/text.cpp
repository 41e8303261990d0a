// SPDX-License-Identifier: Apache-2.0
#include "editaudit/core/text.hpp"

#include <cctype>

#include "editaudit/core/error.hpp"

namespace editaudit::text {

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string_view trim(std::string_view s) {
  auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      return out;
    }
    out.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::vector<std::string> word_tokens(std::string_view s) {
  std::string ascii;
  ascii.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    // U+2019 (right single quotation mark) -> '
    if (i + 2 < s.size() && s.compare(i, 3, "\xE2\x80\x99") == 0) {
      ascii.push_back('\'');
      i += 2;
    } else {
      ascii.push_back(s[i]);
    }
  }

  auto alpha = [&](std::size_t i) {
    return i < ascii.size() && std::isalpha(static_cast<unsigned char>(ascii[i])) != 0;
  };
  std::vector<std::string> out;
  std::string cur;
  for (std::size_t i = 0; i < ascii.size(); ++i) {
    if (alpha(i)) {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ascii[i]))));
      continue;
    }
    if (ascii[i] == '\'' && !cur.empty() && i + 1 < ascii.size() &&
        (ascii[i + 1] == 's' || ascii[i + 1] == 'S') && !alpha(i + 2))
      ++i;
    if (!cur.empty()) out.push_back(std::move(cur));
    cur.clear();
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::string normalize_phrase(std::string_view s) {
  std::string out;
  bool pending_space = false;
  for (char c : trim(s)) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = true;
      continue;
    }
    if (pending_space && !out.empty()) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

bool starts_with_icase(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(s[i])) !=
        std::tolower(static_cast<unsigned char>(prefix[i])))
      return false;
  }
  return true;
}

std::size_t count_slots(std::string_view tmpl) {
  std::size_t n = 0;
  for (auto pos = tmpl.find("{}"); pos != std::string_view::npos; pos = tmpl.find("{}", pos + 2)) ++n;
  return n;
}

std::string fill_slots(std::string_view tmpl, const std::vector<std::string>& args) {
  if (count_slots(tmpl) != args.size())
    throw Error("template has " + std::to_string(count_slots(tmpl)) + " slots but " +
                std::to_string(args.size()) + " values were given");
  std::string out;
  std::size_t start = 0;
  for (const auto& a : args) {
    auto pos = tmpl.find("{}", start);
    out.append(tmpl.substr(start, pos - start));
    out.append(a);
    start = pos + 2;
  }
  out.append(tmpl.substr(start));
  return out;
}

}  // namespace editaudit::text
