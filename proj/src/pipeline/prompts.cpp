// SPDX-License-Identifier: Apache-2.0
#include "editaudit/pipeline/prompts.hpp"

#include "editaudit/core/digest.hpp"
#include "editaudit/core/error.hpp"

namespace editaudit::prompts {

const std::string& get(std::string_view name) {
  const auto& m = all();
  auto it = m.find(name);
  if (it == m.end()) throw Error("unknown prompt template '" + std::string(name) + "'");
  return it->second;
}

std::string digest(std::string_view name) { return sha256_hex(get(name)); }

}  // namespace editaudit::prompts
