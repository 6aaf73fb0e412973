#include <algorithm>
#include <set>

#include "metaphor/annotation_service.hpp"
#include "metaphor/errors.hpp"
#include "metaphor/text.hpp"

namespace metaphor {

Clock system_clock_seconds() {
  return [] { return std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now()); };
}

nlohmann::ordered_json TaskProgress::to_json() const {
  nlohmann::ordered_json j;
  j["task_id"] = task_id;
  j["concept"] = concept_name;
  j["size"] = size;
  j["target_annotators"] = target_annotators;
  j["completed_annotators"] = completed_annotators;
  j["annotators"] = nlohmann::ordered_json::array();
  for (const auto& a : annotators) {
    nlohmann::ordered_json e;
    e["annotator"] = a.annotator;
    e["judged"] = a.judged;
    e["started_at"] = format_timestamp(a.started_at);
    if (a.finished_at) {
      e["finished_at"] = format_timestamp(*a.finished_at);
      e["duration_seconds"] = (*a.finished_at - a.started_at).count();
    } else {
      e["finished_at"] = nullptr;
      e["duration_seconds"] = nullptr;
    }
    j["annotators"].push_back(std::move(e));
  }
  return j;
}

AnnotationStore::AnnotationStore(std::vector<AnnotationTask> tasks, std::map<std::string, std::string> texts,
                                 AnnotationStoreOptions options)
    : tasks_(std::move(tasks)), texts_(std::move(texts)), options_(std::move(options)) {
  if (options_.target_annotators == 0) throw ArgumentError("target annotator count must be positive");
  std::set<std::string> ids;
  for (const auto& t : tasks_) {
    if (!ids.insert(t.task_id).second) throw ArgumentError("duplicate task id '" + t.task_id + "'");
    std::set<std::string> docs;
    for (const auto& d : t.doc_ids) {
      if (!docs.insert(d).second) throw ArgumentError("task '" + t.task_id + "' lists document '" + d + "' twice");
      if (texts_.count(d) == 0) throw ArgumentError("no text for document '" + d + "' of task '" + t.task_id + "'");
    }
    state_[t.task_id];
  }
  if (!options_.journal.empty()) {
    replay();
    if (options_.journal.has_parent_path()) std::filesystem::create_directories(options_.journal.parent_path());
    journal_.open(options_.journal, std::ios::app | std::ios::binary);
    if (!journal_) throw_io("cannot open annotation journal", options_.journal.string());
  }
}

AnnotationStore::~AnnotationStore() = default;

const AnnotationTask* AnnotationStore::find_task(const std::string& id) const {
  for (const auto& t : tasks_) {
    if (t.task_id == id) return &t;
  }
  return nullptr;
}

bool AnnotationStore::finished(const AnnotationTask& task, const SessionState& s) const {
  return s.judged_order.size() == task.doc_ids.size();
}

void AnnotationStore::assign(const std::string& annotator, const AnnotationTask& task, TimePoint at) {
  auto& ts = state_[task.task_id];
  if (ts.sessions.count(annotator) != 0) return;
  ts.annotators.push_back(annotator);
  ts.sessions[annotator].started_at = at;
}

SubmitResult AnnotationStore::apply(const Submission& s, TimePoint at) {
  SubmitResult r;
  const auto* task = find_task(s.task_id);
  if (task == nullptr) {
    r.rejection = SubmitError::unknown_task;
    r.reason = "unknown task '" + s.task_id + "'";
    return r;
  }
  r.total = task->doc_ids.size();
  if (std::find(task->doc_ids.begin(), task->doc_ids.end(), s.doc_id) == task->doc_ids.end()) {
    r.rejection = SubmitError::unknown_document;
    r.reason = "document '" + s.doc_id + "' is not part of task '" + s.task_id + "'";
    return r;
  }
  auto& ts = state_[task->task_id];
  auto sit = ts.sessions.find(s.annotator);
  if (sit == ts.sessions.end()) {
    r.rejection = SubmitError::not_assigned;
    r.reason = "annotator '" + s.annotator + "' has not fetched task '" + s.task_id + "'";
    return r;
  }
  auto& session = sit->second;

  const RecordKey key{s.annotator, s.doc_id, task->concept_name};
  std::optional<Label> previous;
  if (auto it = records_.find(key); it != records_.end()) previous = it->second.label;
  records_[key] = {s.annotator, task->task_id, s.doc_id, task->concept_name, s.label, at};
  if (std::find(session.judged_order.begin(), session.judged_order.end(), s.doc_id) == session.judged_order.end()) {
    session.judged_order.push_back(s.doc_id);
  }
  session.finished_at = session.finished_at ? std::max(*session.finished_at, at) : at;
  audit_.push_back({s.annotator, task->task_id, s.doc_id, task->concept_name, previous, s.label, at, previous.has_value()});

  r.replaced = previous.has_value();
  r.judged = session.judged_order.size();
  return r;
}

nlohmann::ordered_json AnnotationStore::payload(const std::string& annotator, const AnnotationTask& task) const {
  const auto& session = state_.at(task.task_id).sessions.at(annotator);
  nlohmann::ordered_json j;
  j["task_id"] = task.task_id;
  j["concept"] = task.concept_name;
  j["annotator"] = annotator;
  j["codebook"] = task.codebook;
  j["started_at"] = format_timestamp(session.started_at);
  j["progress"] = {{"judged", session.judged_order.size()}, {"total", task.doc_ids.size()}};
  j["items"] = nlohmann::ordered_json::array();
  for (const auto& d : task.doc_ids) {
    nlohmann::ordered_json item;
    item["doc_id"] = d;
    item["text"] = texts_.at(d);
    auto it = records_.find({annotator, d, task.concept_name});
    if (it != records_.end()) {
      item["label"] = std::string(to_string(it->second.label));
    } else {
      item["label"] = nullptr;
    }
    j["items"].push_back(std::move(item));
  }
  return j;
}

void AnnotationStore::journal(const nlohmann::ordered_json& event) {
  if (!journal_.is_open()) return;
  journal_ << event.dump() << '\n';
  journal_.flush();
}

void AnnotationStore::replay() {
  if (!std::filesystem::exists(options_.journal)) return;
  std::size_t line_no = 0;
  for (const auto& line : split(read_file(options_.journal), '\n')) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      const auto event = j.at("event").get<std::string>();
      const auto at = parse_timestamp(j.at("at").get<std::string>());
      if (!at) throw FormatError("bad timestamp");
      if (event == "assign") {
        const auto* task = find_task(j.at("task").get<std::string>());
        if (task == nullptr) throw FormatError("unknown task");
        assign(j.at("annotator").get<std::string>(), *task, *at);
      } else if (event == "judgment") {
        const Submission s{j.at("annotator").get<std::string>(), j.at("task").get<std::string>(),
                           j.at("doc_id").get<std::string>(), parse_label(j.at("label").get<std::string>())};
        if (!apply(s, *at).accepted()) throw FormatError("judgment no longer applies");
      } else {
        throw FormatError("unknown event '" + event + "'");
      }
    } catch (const std::exception& e) {
      throw FormatError(options_.journal.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

std::optional<nlohmann::ordered_json> AnnotationStore::next_task(const std::string& annotator) {
  if (trim(annotator).empty()) throw ArgumentError("annotator id is required");
  std::lock_guard lock(mu_);
  for (const auto& t : tasks_) {
    const auto& ts = state_.at(t.task_id);
    auto it = ts.sessions.find(annotator);
    if (it != ts.sessions.end() && !finished(t, it->second)) return payload(annotator, t);
  }
  for (const auto& t : tasks_) {
    const auto& ts = state_.at(t.task_id);
    if (ts.sessions.count(annotator) != 0 || ts.annotators.size() >= options_.target_annotators) continue;
    const auto now = options_.clock();
    assign(annotator, t, now);
    journal({{"event", "assign"}, {"annotator", annotator}, {"task", t.task_id}, {"at", format_timestamp(now)}});
    return payload(annotator, t);
  }
  return std::nullopt;
}

SubmitResult AnnotationStore::submit(const Submission& s) {
  if (trim(s.annotator).empty()) return {SubmitError::invalid, "annotator id is required", false, 0, 0};
  std::lock_guard lock(mu_);
  const auto now = options_.clock();
  auto r = apply(s, now);
  if (r.accepted()) {
    journal({{"event", "judgment"},
             {"annotator", s.annotator},
             {"task", s.task_id},
             {"doc_id", s.doc_id},
             {"label", std::string(to_string(s.label))},
             {"at", format_timestamp(now)}});
  }
  return r;
}

std::optional<TaskProgress> AnnotationStore::progress(const std::string& task_id) const {
  std::lock_guard lock(mu_);
  const auto* task = find_task(task_id);
  if (task == nullptr) return std::nullopt;
  const auto& ts = state_.at(task_id);
  TaskProgress p{task->task_id, task->concept_name, task->doc_ids.size(), options_.target_annotators, 0, {}};
  for (const auto& a : ts.annotators) {
    const auto& s = ts.sessions.at(a);
    p.annotators.push_back({a, s.judged_order.size(), s.started_at, s.finished_at});
    if (finished(*task, s)) ++p.completed_annotators;
  }
  return p;
}

std::vector<AnnotationRecord> AnnotationStore::records() const {
  std::lock_guard lock(mu_);
  std::vector<AnnotationRecord> out;
  out.reserve(records_.size());
  for (const auto& [key, r] : records_) out.push_back(r);
  std::sort(out.begin(), out.end(), [](const AnnotationRecord& a, const AnnotationRecord& b) {
    return std::tie(a.task_id, a.annotator, a.doc_id) < std::tie(b.task_id, b.annotator, b.doc_id);
  });
  return out;
}

std::vector<AnnotatorSession> AnnotationStore::sessions() const {
  std::lock_guard lock(mu_);
  std::vector<AnnotatorSession> out;
  for (const auto& [task_id, ts] : state_) {
    const auto* task = find_task(task_id);
    for (const auto& [annotator, s] : ts.sessions) {
      AnnotatorSession session{annotator, task_id, s.started_at, s.finished_at.value_or(s.started_at), {}};
      for (const auto& d : s.judged_order) session.labels.push_back(records_.at({annotator, d, task->concept_name}).label);
      out.push_back(std::move(session));
    }
  }
  return out;
}

std::vector<AuditEntry> AnnotationStore::audit_log() const {
  std::lock_guard lock(mu_);
  return audit_;
}

}  // namespace metaphor
