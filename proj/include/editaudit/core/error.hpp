// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace editaudit {

/// Base for every error raised by the toolkit. Modules derive their own
/// types so callers can catch narrowly; the CLI catches this one.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace editaudit
