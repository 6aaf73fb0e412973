#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "metaphor/annotation.hpp"

namespace httplib {
class Server;
}

namespace metaphor {

using Clock = std::function<TimePoint()>;
Clock system_clock_seconds();

struct AnnotationStoreOptions {
  // Annotators each task should receive before it stops being handed out.
  std::size_t target_annotators = 8;
  // JSONL event journal; replayed on construction, appended afterwards.
  // Empty keeps everything in memory.
  std::filesystem::path journal;
  Clock clock = system_clock_seconds();
};

struct Submission {
  std::string annotator;
  std::string task_id;
  std::string doc_id;
  Label label = Label::no;
};

// Every accepted judgment, in arrival order; a replacement appears as a
// second entry for the same key with `replaced` set.
struct AuditEntry {
  std::string annotator;
  std::string task_id;
  std::string doc_id;
  std::string concept_name;
  std::optional<Label> previous;
  Label label = Label::no;
  TimePoint at{};
  bool replaced = false;
};

enum class SubmitError { none, unknown_task, unknown_document, not_assigned, invalid };

struct SubmitResult {
  SubmitError rejection = SubmitError::none;
  std::string reason;
  bool replaced = false;
  std::size_t judged = 0;  // documents of the task this annotator has judged
  std::size_t total = 0;

  bool accepted() const { return rejection == SubmitError::none; }
};

struct AnnotatorProgress {
  std::string annotator;
  std::size_t judged = 0;
  TimePoint started_at{};
  std::optional<TimePoint> finished_at;
};

struct TaskProgress {
  std::string task_id;
  std::string concept_name;
  std::size_t size = 0;
  std::size_t target_annotators = 0;
  std::size_t completed_annotators = 0;
  std::vector<AnnotatorProgress> annotators;  // assignment order

  nlohmann::ordered_json to_json() const;
};

/// Task queue and judgment store behind the annotation endpoints.
///
/// next_task hands an annotator their unfinished task if they have one,
/// otherwise the first task (in task order) they have not worked on whose
/// assigned annotator count is below the target. The first fetch starts the
/// annotator's session clock; each judgment moves its end. A repeated
/// judgment for the same (annotator, document, concept) replaces the earlier
/// one and is kept in the audit log. All methods are thread-safe.
class AnnotationStore {
 public:
  AnnotationStore(std::vector<AnnotationTask> tasks, std::map<std::string, std::string> texts,
                  AnnotationStoreOptions options = {});
  ~AnnotationStore();
  AnnotationStore(const AnnotationStore&) = delete;
  AnnotationStore& operator=(const AnnotationStore&) = delete;

  // Payload for GET /tasks/next, or nullopt when there is no work left.
  std::optional<nlohmann::ordered_json> next_task(const std::string& annotator);
  SubmitResult submit(const Submission& s);
  std::optional<TaskProgress> progress(const std::string& task_id) const;

  std::vector<AnnotationRecord> records() const;  // sorted by (task, annotator, doc)
  std::vector<AnnotatorSession> sessions() const;  // sorted by (task, annotator)
  std::vector<AuditEntry> audit_log() const;
  const std::vector<AnnotationTask>& tasks() const { return tasks_; }

 private:
  struct SessionState {
    TimePoint started_at{};
    std::optional<TimePoint> finished_at;
    std::vector<std::string> judged_order;  // doc ids by first judgment
  };
  struct TaskState {
    std::vector<std::string> annotators;  // assignment order
    std::map<std::string, SessionState> sessions;
  };
  using RecordKey = std::tuple<std::string, std::string, std::string>;  // annotator, doc, concept

  const AnnotationTask* find_task(const std::string& id) const;
  bool finished(const AnnotationTask& task, const SessionState& s) const;
  void assign(const std::string& annotator, const AnnotationTask& task, TimePoint at);
  SubmitResult apply(const Submission& s, TimePoint at);
  nlohmann::ordered_json payload(const std::string& annotator, const AnnotationTask& task) const;
  void journal(const nlohmann::ordered_json& event);
  void replay();

  std::vector<AnnotationTask> tasks_;
  std::map<std::string, std::string> texts_;
  AnnotationStoreOptions options_;
  mutable std::mutex mu_;
  std::map<std::string, TaskState> state_;
  std::map<RecordKey, AnnotationRecord> records_;
  std::vector<AuditEntry> audit_;
  std::ofstream journal_;
};

/// HTTP front end:
///   GET  /tasks/next?annotator=ID   200 task payload | 404 {"error":"no_work"}
///   POST /judgments                 {annotator, task, doc_id, label}
///                                   200 ack | 400 invalid | 404 unknown task | 409 not assigned
///   GET  /progress/{task}           200 progress | 404
///   GET  /export/annotations        CSV annotator,task,doc_id,concept,label,timestamp
///   GET  /export/sessions           CSV annotator,task,started_at,finished_at,duration_seconds,labels
/// Responses carry permissive CORS headers so a browser client can be served
/// from another origin.
class AnnotationServer {
 public:
  explicit AnnotationServer(AnnotationStore& store);
  ~AnnotationServer();
  AnnotationServer(const AnnotationServer&) = delete;
  AnnotationServer& operator=(const AnnotationServer&) = delete;

  // Binds and serves on a background thread. port 0 picks a free port.
  // Returns the bound port; throws IoError when binding fails.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  // Serves on the calling thread until stop() is called.
  void run(const std::string& host, int port);
  void stop();

 private:
  void routes();

  AnnotationStore& store_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

}  // namespace metaphor
