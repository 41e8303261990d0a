// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>
#include <string_view>

namespace editaudit::prompts {

/// Compiled-in templates from resources/prompts, keyed by file stem.
const std::map<std::string, std::string, std::less<>>& all();

/// Template text; throws editaudit::Error for an unknown name.
const std::string& get(std::string_view name);

/// sha256 of the template bytes, recorded in run metadata.
std::string digest(std::string_view name);

}  // namespace editaudit::prompts
