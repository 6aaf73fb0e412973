#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "metaphor/timestamp.hpp"

namespace metaphor {

// Pseudo-concept for the condition that asks about metaphor in general.
inline constexpr std::string_view kDomainAgnostic = "domain-agnostic";

enum class Label { yes, no, dont_know };

std::string_view to_string(Label l);
// Accepts yes, no, dont_know (also "dont-know", "don't know"); case-insensitive.
Label parse_label(std::string_view s);

struct AnnotationTask {
  std::string task_id;
  std::string concept_name;
  std::vector<std::string> doc_ids;
  std::string codebook;

  nlohmann::ordered_json to_json() const;
  static AnnotationTask from_json(const nlohmann::json& j);
};

/// Shuffles the sample with a generator seeded by `seed` and cuts it into
/// tasks of task_size ids, named "<concept>-001", "<concept>-002", ...
/// Each task carries the codebook excerpt for its concept.
/// Throws ArgumentError on duplicate ids, an empty sample, or a sample size
/// not divisible by task_size.
std::vector<AnnotationTask> create_tasks(const std::vector<std::string>& sample_ids, const std::string& concept_name,
                                         std::size_t task_size = 20, std::uint64_t seed = 0);

void save_tasks(const std::filesystem::path& path, const std::vector<AnnotationTask>& tasks);
std::vector<AnnotationTask> load_tasks(const std::filesystem::path& path);

struct AnnotationRecord {
  std::string annotator;
  std::string task_id;
  std::string doc_id;
  std::string concept_name;
  Label label = Label::no;
  TimePoint submitted_at{};

  friend bool operator==(const AnnotationRecord&, const AnnotationRecord&) = default;
};

/// One annotator working one task, timed by the server from the first task
/// fetch to the last judgment. `labels` holds the annotator's current label
/// for each judged document of the task.
struct AnnotatorSession {
  std::string annotator;
  std::string task_id;
  TimePoint started_at{};
  TimePoint finished_at{};
  std::vector<Label> labels;

  std::chrono::seconds duration() const { return finished_at - started_at; }
};

struct FilterOptions {
  std::chrono::seconds min_duration{180};
};

struct FilterReport {
  std::vector<AnnotationRecord> records;
  std::size_t dont_know = 0;
  std::size_t too_fast = 0;
  std::size_t same_label = 0;
  std::size_t no_session = 0;
};

/// Removes, in this order of attribution:
///   sessions shorter than min_duration (all of their records; a session of
///   exactly min_duration is kept),
///   sessions whose labels are all the same value (all of their records),
///   remaining dont_know records.
/// Session-level checks use the session's own label multiset, so the filter
/// is idempotent. Records with no matching (annotator, task) session are
/// dropped and counted. Input order is preserved.
FilterReport filter_annotations_report(const std::vector<AnnotationRecord>& records,
                                       const std::vector<AnnotatorSession>& sessions,
                                       const FilterOptions& options = {});
std::vector<AnnotationRecord> filter_annotations(const std::vector<AnnotationRecord>& records,
                                                 const std::vector<AnnotatorSession>& sessions,
                                                 const FilterOptions& options = {});

struct GroundTruth {
  std::string doc_id;
  std::string concept_name;
  double score = 0.0;  // yes / (yes + no)
  std::size_t yes = 0;
  std::size_t no = 0;

  std::size_t valid_count() const { return yes + no; }
};

struct Aggregation {
  std::vector<GroundTruth> truths;  // sorted by (concept, doc id)
  // Expected (doc id, concept) pairs with no valid record.
  std::vector<std::pair<std::string, std::string>> coverage_gaps;
};

/// Fraction of yes among yes/no records per (document, concept). dont_know
/// records are ignored. `expected` lists the sampled pairs; those without any
/// valid record are reported as coverage gaps and get no GroundTruth.
Aggregation aggregate_scores(const std::vector<AnnotationRecord>& valid_records,
                             const std::vector<std::pair<std::string, std::string>>& expected = {});

// Every (doc id, concept) pair the tasks cover.
std::vector<std::pair<std::string, std::string>> task_items(const std::vector<AnnotationTask>& tasks);

/// Nominal Krippendorff's alpha over units (document, concept), built from the
/// coincidence matrix. Units with a single record do not pair and are
/// skipped. Throws UndefinedMetric when no unit has two records or when only
/// one label value occurs among pairable records.
double krippendorff_alpha(const std::vector<AnnotationRecord>& records);

inline constexpr std::string_view kAnnotationCsvHeader = "annotator,task,doc_id,concept,label,timestamp";
inline constexpr std::string_view kSessionCsvHeader =
    "annotator,task,started_at,finished_at,duration_seconds,labels";

std::string annotations_to_csv(const std::vector<AnnotationRecord>& records);
std::vector<AnnotationRecord> annotations_from_csv(std::string_view content);
// labels column: the labels in judgment order joined by ';'.
std::string sessions_to_csv(const std::vector<AnnotatorSession>& sessions);
std::vector<AnnotatorSession> sessions_from_csv(std::string_view content);

}  // namespace metaphor
