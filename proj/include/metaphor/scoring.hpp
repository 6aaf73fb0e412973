#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "metaphor/concept_scores.hpp"
#include "metaphor/corpus.hpp"
#include "metaphor/discourse.hpp"
#include "metaphor/embedding.hpp"
#include "metaphor/llm_provider.hpp"
#include "metaphor/prompts.hpp"
#include "metaphor/registry.hpp"
#include "metaphor/score_table.hpp"
#include "metaphor/word_metaphor.hpp"

namespace metaphor {

struct ConceptTriple {
  std::string concept_name;
  double word = 0.0;
  double discourse = 0.0;
  double combined = 0.0;
};

struct MetaphorScoreVector {
  std::string doc_id;
  std::vector<ConceptTriple> scores;
};

/// Componentwise SUM: combined = word + discourse.
/// Throws ArgumentError unless both vectors list the same concepts in the
/// same order.
MetaphorScoreVector combine(const std::string& doc_id, const ConceptScores& word, const ConceptScores& discourse);

struct ConceptStats {
  double mean = 0.0;
  double sd = 0.0;  // sample sd, divisor n - 1
  std::size_t n = 0;
};

struct StandardizedRow {
  std::string doc_id;
  std::string concept_name;
  double z = 0.0;
};

struct Standardized {
  std::vector<StandardizedRow> rows;  // table order
  std::map<std::string, ConceptStats> stats;

  // Throws ArgumentError if the pair is absent.
  double z(std::string_view doc_id, std::string_view concept_name) const;
};

/// z = (x - mean) / sd per concept over the whole table, sample sd.
/// Throws ArgumentError naming the concept when it has fewer than two rows or
/// zero variance.
Standardized standardize(const ScoreTable& table, ScoreField field = ScoreField::combined);

struct ScoringConfig {
  LlmProviderConfig llm;
  PromptVariant variant = PromptVariant::simple;
  std::size_t max_concurrent = 4;
  std::size_t per_minute_budget = 0;  // 0 = unlimited
  std::size_t embedding_max_concurrent = 4;
  std::size_t workers = 4;
  // Abort when more than this fraction of documents fail.
  double failure_threshold = 0.05;
  // Append-only results log used for resuming; empty disables persistence.
  std::filesystem::path results_log;
  // Directory for centroid cache entries; empty disables caching.
  std::filesystem::path centroid_cache_dir;
  bool strip_urls_mentions = false;
  // Experimental and off by default. When enabled the stored word and
  // discourse components are multiplied by these weights before summing.
  bool experimental_weighting = false;
  double word_weight = 1.0;
  double discourse_weight = 1.0;
  // Provenance timestamp; the current time when absent.
  std::optional<std::string> run_timestamp;
  Sleeper sleep = real_sleeper();

  void validate() const;
};

struct FailedDocument {
  std::string doc_id;
  std::string reason;
};

struct RunReport {
  std::size_t documents = 0;
  std::size_t ok = 0;
  std::size_t recovered = 0;
  std::size_t failed_empty = 0;
  std::size_t failed = 0;
  // Documents taken from the results log instead of calling providers.
  std::size_t resumed = 0;
  std::size_t ignored_log_lines = 0;
  std::size_t llm_attempts = 0;
  std::vector<FailedDocument> failures;  // sorted by doc id
  std::vector<std::string> failed_empty_ids;
  bool aborted = false;

  nlohmann::ordered_json to_json() const;
};

class ScoringAborted : public std::runtime_error {
 public:
  ScoringAborted(const std::string& what, RunReport report)
      : std::runtime_error(what), report_(std::move(report)) {}
  const RunReport& report() const { return report_; }

 private:
  RunReport report_;
};

struct ScoreRun {
  ScoreTable table;
  RunReport report;
  CentroidSet centroids;
};

/// Scores every document against every registry concept.
///
/// Documents fan out to `workers` threads; provider calls pass through
/// request gates with the configured caps. Every completed document is
/// appended to the results log (ok, recovered and failed-empty documents;
/// failed documents are retried on the next run). Log entries are only reused
/// when their provider ids, model and prompt variant match this run. Rows are
/// ordered by document id, then registry concept order. Failed documents get
/// no rows and are listed in the report. Throws ScoringAborted once failures
/// exceed the threshold.
ScoreRun score_corpus(const std::vector<Document>& docs, LlmProvider& llm, EmbeddingProvider& embedder,
                      const ConceptRegistry& registry, const ScoringConfig& config);

}  // namespace metaphor
