#include <httplib.h>

#include "metaphor/annotation_service.hpp"
#include "metaphor/errors.hpp"

namespace metaphor {
namespace {

void send_json(httplib::Response& res, int status, const nlohmann::ordered_json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& error, const std::string& detail = {}) {
  nlohmann::ordered_json j{{"error", error}};
  if (!detail.empty()) j["detail"] = detail;
  send_json(res, status, j);
}

int status_for(SubmitError r) {
  switch (r) {
    case SubmitError::none:
      return 200;
    case SubmitError::unknown_task:
      return 404;
    case SubmitError::not_assigned:
      return 409;
    case SubmitError::unknown_document:
    case SubmitError::invalid:
      return 400;
  }
  return 400;
}

}  // namespace

AnnotationServer::AnnotationServer(AnnotationStore& store)
    : store_(store), server_(std::make_unique<httplib::Server>()) {
  routes();
}

AnnotationServer::~AnnotationServer() { stop(); }

void AnnotationServer::routes() {
  auto& s = *server_;
  s.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                         {"Access-Control-Allow-Headers", "Content-Type"},
                         {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
  s.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  s.Get("/tasks/next", [this](const httplib::Request& req, httplib::Response& res) {
    const auto annotator = req.get_param_value("annotator");
    if (annotator.empty()) return send_error(res, 400, "missing_annotator", "query parameter 'annotator' is required");
    try {
      auto task = store_.next_task(annotator);
      if (!task) return send_error(res, 404, "no_work", "no tasks available");
      send_json(res, 200, *task);
    } catch (const ArgumentError& e) {
      send_error(res, 400, "invalid", e.what());
    }
  });

  s.Post("/judgments", [this](const httplib::Request& req, httplib::Response& res) {
    Submission sub;
    try {
      const auto j = nlohmann::json::parse(req.body);
      sub.annotator = j.at("annotator").get<std::string>();
      sub.task_id = j.at("task").get<std::string>();
      sub.doc_id = j.at("doc_id").get<std::string>();
      sub.label = parse_label(j.at("label").get<std::string>());
    } catch (const std::exception& e) {
      return send_error(res, 400, "invalid", e.what());
    }
    const auto r = store_.submit(sub);
    if (!r.accepted()) return send_error(res, status_for(r.rejection), "rejected", r.reason);
    send_json(res, 200,
              {{"status", "ok"}, {"replaced", r.replaced}, {"progress", {{"judged", r.judged}, {"total", r.total}}}});
  });

  s.Get(R"(/progress/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    const auto p = store_.progress(req.matches[1]);
    if (!p) return send_error(res, 404, "unknown_task", "unknown task '" + std::string(req.matches[1]) + "'");
    send_json(res, 200, p->to_json());
  });

  s.Get("/export/annotations", [this](const httplib::Request&, httplib::Response& res) {
    res.set_content(annotations_to_csv(store_.records()), "text/csv");
  });

  s.Get("/export/sessions", [this](const httplib::Request&, httplib::Response& res) {
    res.set_content(sessions_to_csv(store_.sessions()), "text/csv");
  });
}

int AnnotationServer::start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = server_->bind_to_any_port(host);
    if (bound < 0) throw IoError("cannot bind annotation server on " + host);
  } else if (!server_->bind_to_port(host, port)) {
    throw IoError("cannot bind annotation server on " + host + ":" + std::to_string(port));
  }
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return bound;
}

void AnnotationServer::run(const std::string& host, int port) {
  if (!server_->listen(host, port)) throw IoError("cannot serve annotations on " + host + ":" + std::to_string(port));
}

void AnnotationServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace metaphor
