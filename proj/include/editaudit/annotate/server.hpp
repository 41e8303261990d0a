// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "editaudit/annotate/store.hpp"
#include "editaudit/core/types.hpp"

namespace editaudit::annotate {

struct ServerOptions {
  /// Directory served at "/" (the annotation UI bundle), if any.
  std::optional<std::filesystem::path> static_dir;
  /// Pre-filled difference captions by edit id.
  std::map<std::string, std::string> captions;
};

/// JSON API over an AnnotationStore:
///   GET  /tasks/next?annotator=ID        (or X-Annotator-Id header)
///   POST /annotations
///   GET  /edits/{id}
///   GET  /edits/{id}/aggregate
///   GET  /reports/agreement
///   GET  /export/labels
///   GET  /files/{id}/{source|edited|mask}
class AnnotateServer {
 public:
  AnnotateServer(AnnotationStore& store, const EditSet& edits, ServerOptions options = {});
  ~AnnotateServer();

  /// Binds and serves on a background thread; returns the bound port
  /// (pass 0 for an ephemeral one).
  int start(const std::string& host, int port);
  /// Blocks serving on the calling thread.
  void listen(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace editaudit::annotate
