// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "editaudit/core/types.hpp"

namespace editaudit {

class ManifestError : public Error {
 public:
  using Error::Error;
};

struct Violation {
  std::string code;    // e.g. "mask-dimension-mismatch"
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  bool has(std::string_view code) const;
};

/// Checks every EditRecord invariant. Paths are used as given (load_manifest
/// resolves them before calling). Never throws; all failures are entries.
ValidationReport validate_edit(const EditRecord& record);

/// Reads a line-delimited manifest:
///   {"id", "source", "edited", "mask", "instruction", "editor"}
/// Relative paths resolve against the manifest's directory. Blank lines are
/// skipped. Throws ManifestError naming the offending line.
EditSet load_manifest(const std::filesystem::path& path);

/// Writes records with paths relative to the manifest's directory.
void write_manifest(const EditSet& set, const std::filesystem::path& path);

}  // namespace editaudit
