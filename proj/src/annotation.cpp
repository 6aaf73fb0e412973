#include "metaphor/annotation.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>

#include "metaphor/codebook.hpp"
#include "metaphor/csv.hpp"
#include "metaphor/errors.hpp"
#include "metaphor/registry.hpp"
#include "metaphor/rng.hpp"
#include "metaphor/text.hpp"

namespace metaphor {

std::string_view to_string(Label l) {
  switch (l) {
    case Label::yes:
      return "yes";
    case Label::no:
      return "no";
    case Label::dont_know:
      return "dont_know";
  }
  return "no";
}

Label parse_label(std::string_view s) {
  const auto v = to_lower_ascii(trim(s));
  if (v == "yes") return Label::yes;
  if (v == "no") return Label::no;
  if (v == "dont_know" || v == "dont-know" || v == "don't know" || v == "dont know") return Label::dont_know;
  throw ArgumentError("unknown label '" + std::string(s) + "' (expected yes, no or dont_know)");
}

nlohmann::ordered_json AnnotationTask::to_json() const {
  nlohmann::ordered_json j;
  j["task_id"] = task_id;
  j["concept"] = concept_name;
  j["doc_ids"] = doc_ids;
  j["codebook"] = codebook;
  return j;
}

AnnotationTask AnnotationTask::from_json(const nlohmann::json& j) {
  try {
    return {j.at("task_id").get<std::string>(), j.at("concept").get<std::string>(),
            j.at("doc_ids").get<std::vector<std::string>>(), j.value("codebook", std::string())};
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed annotation task: ") + e.what());
  }
}

std::vector<AnnotationTask> create_tasks(const std::vector<std::string>& sample_ids, const std::string& concept_name,
                                         std::size_t task_size, std::uint64_t seed) {
  if (task_size == 0) throw ArgumentError("task size must be positive");
  if (sample_ids.empty()) throw ArgumentError("cannot create tasks from an empty sample");
  if (sample_ids.size() % task_size != 0) {
    throw ArgumentError("sample of " + std::to_string(sample_ids.size()) + " ids is not divisible into tasks of " +
                        std::to_string(task_size));
  }
  {
    std::set<std::string_view> seen;
    for (const auto& id : sample_ids) {
      if (!seen.insert(id).second) throw ArgumentError("duplicate id '" + id + "' in sample");
    }
  }
  const auto excerpt = codebook_excerpt(concept_name);
  auto ids = sample_ids;
  Rng rng(seed);
  rng.shuffle(ids);

  std::vector<AnnotationTask> tasks;
  const std::size_t n = ids.size() / task_size;
  for (std::size_t t = 0; t < n; ++t) {
    char suffix[32];
    std::snprintf(suffix, sizeof suffix, "-%03zu", t + 1);
    AnnotationTask task{canonical_concept_name(concept_name) + suffix, canonical_concept_name(concept_name), {}, excerpt};
    task.doc_ids.assign(ids.begin() + static_cast<std::ptrdiff_t>(t * task_size),
                        ids.begin() + static_cast<std::ptrdiff_t>((t + 1) * task_size));
    tasks.push_back(std::move(task));
  }
  return tasks;
}

void save_tasks(const std::filesystem::path& path, const std::vector<AnnotationTask>& tasks) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& t : tasks) j.push_back(t.to_json());
  write_file_atomic(path, j.dump(2) + "\n");
}

std::vector<AnnotationTask> load_tasks(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  if (!j.is_array()) throw FormatError(path.string() + ": expected an array of tasks");
  std::vector<AnnotationTask> out;
  std::set<std::string> ids;
  for (const auto& t : j) {
    out.push_back(AnnotationTask::from_json(t));
    if (!ids.insert(out.back().task_id).second) throw FormatError(path.string() + ": duplicate task id " + out.back().task_id);
  }
  return out;
}

FilterReport filter_annotations_report(const std::vector<AnnotationRecord>& records,
                                       const std::vector<AnnotatorSession>& sessions, const FilterOptions& options) {
  enum class Verdict { keep, too_fast, same_label };
  std::map<std::pair<std::string, std::string>, Verdict> verdicts;
  for (const auto& s : sessions) {
    Verdict v = Verdict::keep;
    if (s.duration() < options.min_duration) {
      v = Verdict::too_fast;
    } else if (!s.labels.empty() &&
               std::all_of(s.labels.begin(), s.labels.end(), [&](Label l) { return l == s.labels.front(); })) {
      v = Verdict::same_label;
    }
    verdicts[{s.annotator, s.task_id}] = v;
  }

  FilterReport out;
  for (const auto& r : records) {
    auto it = verdicts.find({r.annotator, r.task_id});
    if (it == verdicts.end()) {
      ++out.no_session;
    } else if (it->second == Verdict::too_fast) {
      ++out.too_fast;
    } else if (it->second == Verdict::same_label) {
      ++out.same_label;
    } else if (r.label == Label::dont_know) {
      ++out.dont_know;
    } else {
      out.records.push_back(r);
    }
  }
  return out;
}

std::vector<AnnotationRecord> filter_annotations(const std::vector<AnnotationRecord>& records,
                                                 const std::vector<AnnotatorSession>& sessions,
                                                 const FilterOptions& options) {
  return filter_annotations_report(records, sessions, options).records;
}

Aggregation aggregate_scores(const std::vector<AnnotationRecord>& valid_records,
                             const std::vector<std::pair<std::string, std::string>>& expected) {
  // Keyed by (concept, doc) for the output order.
  std::map<std::pair<std::string, std::string>, std::pair<std::size_t, std::size_t>> counts;
  for (const auto& r : valid_records) {
    if (r.label == Label::dont_know) continue;
    auto& c = counts[{r.concept_name, r.doc_id}];
    (r.label == Label::yes ? c.first : c.second) += 1;
  }
  Aggregation out;
  for (const auto& [key, c] : counts) {
    const auto [yes, no] = c;
    out.truths.push_back({key.second, key.first, static_cast<double>(yes) / static_cast<double>(yes + no), yes, no});
  }
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& [doc, concept_name] : expected) {
    if (!seen.insert({doc, concept_name}).second) continue;
    if (counts.count({concept_name, doc}) == 0) out.coverage_gaps.emplace_back(doc, concept_name);
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> task_items(const std::vector<AnnotationTask>& tasks) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& t : tasks) {
    for (const auto& id : t.doc_ids) out.emplace_back(id, t.concept_name);
  }
  return out;
}

std::string annotations_to_csv(const std::vector<AnnotationRecord>& records) {
  std::string out(kAnnotationCsvHeader);
  out += '\n';
  for (const auto& r : records) {
    out += csv::row({r.annotator, r.task_id, r.doc_id, r.concept_name, std::string(to_string(r.label)),
                     format_timestamp(r.submitted_at)});
  }
  return out;
}

std::vector<AnnotationRecord> annotations_from_csv(std::string_view content) {
  const auto rows = csv::parse(content);
  if (rows.empty()) throw FormatError("annotation export is empty");
  const csv::Header h(rows.front());
  const auto ia = h.require("annotator"), it = h.require("task"), id = h.require("doc_id"),
             ic = h.require("concept"), il = h.require("label"), is = h.require("timestamp");
  std::vector<AnnotationRecord> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() == 1 && r[0].empty()) continue;
    if (r.size() != rows.front().size()) throw FormatError("annotation export row " + std::to_string(i + 1) + " has the wrong field count");
    const auto ts = parse_timestamp(r[is]);
    if (!ts) throw FormatError("annotation export row " + std::to_string(i + 1) + ": bad timestamp");
    out.push_back({r[ia], r[it], r[id], r[ic], parse_label(r[il]), *ts});
  }
  return out;
}

std::string sessions_to_csv(const std::vector<AnnotatorSession>& sessions) {
  std::string out(kSessionCsvHeader);
  out += '\n';
  for (const auto& s : sessions) {
    std::vector<std::string> labels;
    for (auto l : s.labels) labels.emplace_back(to_string(l));
    out += csv::row({s.annotator, s.task_id, format_timestamp(s.started_at), format_timestamp(s.finished_at),
                     std::to_string(s.duration().count()), join(labels, ";")});
  }
  return out;
}

std::vector<AnnotatorSession> sessions_from_csv(std::string_view content) {
  const auto rows = csv::parse(content);
  if (rows.empty()) throw FormatError("session export is empty");
  const csv::Header h(rows.front());
  const auto ia = h.require("annotator"), it = h.require("task"), is = h.require("started_at"),
             ie = h.require("finished_at"), il = h.require("labels");
  std::vector<AnnotatorSession> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() == 1 && r[0].empty()) continue;
    if (r.size() != rows.front().size()) throw FormatError("session export row " + std::to_string(i + 1) + " has the wrong field count");
    const auto start = parse_timestamp(r[is]);
    const auto finish = parse_timestamp(r[ie]);
    if (!start || !finish) throw FormatError("session export row " + std::to_string(i + 1) + ": bad timestamp");
    AnnotatorSession s{r[ia], r[it], *start, *finish, {}};
    if (!r[il].empty()) {
      for (const auto& l : split(r[il], ';')) s.labels.push_back(parse_label(l));
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace metaphor
