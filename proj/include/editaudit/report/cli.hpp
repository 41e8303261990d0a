// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <ostream>

#include "editaudit/providers/provider.hpp"

namespace editaudit::cli {

/// Entry point of the editaudit command. Returns the process exit status.
/// `transport` replaces the HTTP client in live and record modes.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err,
        std::shared_ptr<providers::Transport> transport = nullptr);

}  // namespace editaudit::cli
