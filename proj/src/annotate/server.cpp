// SPDX-License-Identifier: Apache-2.0
#include "editaudit/annotate/server.hpp"

#include <fstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace editaudit::annotate {

using nlohmann::json;

namespace {

int status_for(const std::string& code) {
  if (code == "unknown-edit" || code == "unknown-annotator") return 404;
  if (code == "duplicate" || code == "full" || code == "no-submissions") return 409;
  return 400;
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, const AnnotateError& e) {
  send_json(res, status_for(e.code()), {{"error", e.code()}, {"message", e.what()}});
}

json template_json() {
  json acc = json::array();
  for (auto a : kAllAccuracyLevels) acc.push_back(to_string(a));
  json art = json::array();
  for (auto a : kAllArtifactLevels) art.push_back(to_string(a));
  return {{"questions",
           json::array({"accuracy_level", "contextual_feedback", "technical_precision",
                        "visual_consistency", "artifact_level", "difference_caption"})},
          {"accuracy_levels", acc},
          {"artifact_levels", art},
          {"caption_verdicts", json::array({"accepted", "corrected"})}};
}

std::string annotator_of(const httplib::Request& req) {
  if (req.has_param("annotator")) return req.get_param_value("annotator");
  return req.get_header_value("X-Annotator-Id");
}

}  // namespace

struct AnnotateServer::Impl {
  AnnotationStore& store;
  const EditSet& edits;
  ServerOptions options;
  httplib::Server server;
  std::thread thread;

  json edit_json(const EditRecord& e) const {
    json j{{"id", e.id},
           {"instruction", e.instruction},
           {"editor", e.editor_tag},
           {"images",
            {{"source", "/files/" + e.id + "/source"},
             {"edited", "/files/" + e.id + "/edited"},
             {"mask", "/files/" + e.id + "/mask"}}},
           {"submissions", store.submissions(e.id)}};
    const auto it = options.captions.find(e.id);
    j["caption"] = it == options.captions.end() ? json(nullptr) : json(it->second);
    return j;
  }

  void routes() {
    server.Get("/tasks/next", [this](const httplib::Request& req, httplib::Response& res) {
      try {
        const auto who = annotator_of(req);
        const auto id = store.next_task(who);
        if (!id) {
          send_json(res, 200, {{"task", nullptr}});
          return;
        }
        const auto* e = edits.find(*id);
        send_json(res, 200, {{"task", {{"edit", edit_json(*e)}, {"template", template_json()}}}});
      } catch (const AnnotateError& e) {
        send_error(res, e);
      }
    });

    server.Post("/annotations", [this](const httplib::Request& req, httplib::Response& res) {
      try {
        json body;
        try {
          body = json::parse(req.body);
        } catch (const json::parse_error& e) {
          throw AnnotateError("invalid", std::string("body is not JSON: ") + e.what());
        }
        auto rec = record_from_json(body);
        if (rec.annotator_id.empty()) rec.annotator_id = req.get_header_value("X-Annotator-Id");
        const auto edit_id = rec.edit_id;
        const auto count = store.submit(std::move(rec));
        send_json(res, 201, {{"status", "ok"}, {"edit_id", edit_id}, {"submissions", count}});
      } catch (const AnnotateError& e) {
        send_error(res, e);
      }
    });

    server.Get(R"(/edits/([^/]+)/aggregate)", [this](const httplib::Request& req, httplib::Response& res) {
      try {
        send_json(res, 200, to_json(store.aggregate(req.matches[1].str())));
      } catch (const AnnotateError& e) {
        send_error(res, e);
      }
    });

    server.Get(R"(/edits/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      const auto* e = edits.find(req.matches[1].str());
      if (!e || !store.has_edit(e->id)) {
        send_error(res, AnnotateError("unknown-edit", "unknown edit '" + req.matches[1].str() + "'"));
        return;
      }
      send_json(res, 200, edit_json(*e));
    });

    server.Get("/reports/agreement", [this](const httplib::Request&, httplib::Response& res) {
      send_json(res, 200, to_json(store.agreement_report()));
    });

    server.Get("/export/labels", [this](const httplib::Request&, httplib::Response& res) {
      res.set_content(store.export_labels(), "application/x-ndjson");
    });

    server.Get(R"(/files/([^/]+)/(source|edited|mask))",
               [this](const httplib::Request& req, httplib::Response& res) {
                 const auto* e = edits.find(req.matches[1].str());
                 if (!e) {
                   send_error(res, AnnotateError("unknown-edit", "unknown edit"));
                   return;
                 }
                 const auto which = req.matches[2].str();
                 const auto& path = which == "source"   ? e->source_image
                                    : which == "edited" ? e->edited_image
                                                        : e->edit_mask;
                 std::ifstream in(path, std::ios::binary);
                 if (!in) {
                   send_json(res, 404, {{"error", "missing-file"}, {"message", path.string()}});
                   return;
                 }
                 std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
                 const auto ext = path.extension().string();
                 res.set_content(bytes, ext == ".jpg" || ext == ".jpeg" ? "image/jpeg" : "image/png");
               });

    if (options.static_dir) server.set_mount_point("/", options.static_dir->string());
  }
};

AnnotateServer::AnnotateServer(AnnotationStore& store, const EditSet& edits, ServerOptions options)
    : impl_(new Impl{store, edits, std::move(options), {}, {}}) {
  for (const auto& r : edits.records)
    if (!store.has_edit(r.id)) throw Error("edit '" + r.id + "' is not in the annotation store");
  impl_->routes();
}

AnnotateServer::~AnnotateServer() { stop(); }

int AnnotateServer::start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) throw Error("cannot bind " + host + ":" + std::to_string(port));
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void AnnotateServer::listen(const std::string& host, int port) {
  if (!impl_->server.listen(host, port))
    throw Error("cannot listen on " + host + ":" + std::to_string(port));
}

void AnnotateServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace editaudit::annotate
