// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace editaudit::text {

std::string to_lower(std::string_view s);
std::string_view trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

/// Lowercased alphabetic runs; apostrophe-s is dropped ("coat's" -> "coat").
std::vector<std::string> word_tokens(std::string_view s);

/// Lowercase, trim and collapse internal whitespace.
std::string normalize_phrase(std::string_view s);

bool starts_with_icase(std::string_view s, std::string_view prefix);

/// Replaces each "{}" in `tmpl` with the next argument, in order. Throws
/// editaudit::Error when the slot count and argument count differ.
std::string fill_slots(std::string_view tmpl, const std::vector<std::string>& args);
std::size_t count_slots(std::string_view tmpl);

}  // namespace editaudit::text
