#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "metaphor/embedding.hpp"
#include "metaphor/llm_provider.hpp"
#include "metaphor/reports.hpp"
#include "metaphor/score_table.hpp"
#include "metaphor/word_metaphor.hpp"

namespace metaphor::cli {

struct EvaluationModelSpec {
  std::string name;
  std::filesystem::path scores;  // empty: the run's own score table
  ScoreField field = ScoreField::combined;
};

/// Everything a run needs, read from one JSON file. Relative paths resolve
/// against the config file's directory. Command-line flags override fields
/// after loading.
struct RunConfig {
  std::uint64_t seed = 0;
  bool mock_providers = false;

  std::filesystem::path corpus;
  std::filesystem::path registry;  // empty: built-in registry
  std::filesystem::path output_dir = "out";
  std::filesystem::path cache_dir;  // empty: <output_dir>/cache
  std::filesystem::path llm_script;  // mock LLM responses

  LlmProviderConfig llm;
  HttpLlmSettings llm_http;
  std::string embedding_kind = "hash";  // hash | http
  std::size_t embedding_dimension = 384;
  HttpEmbeddingSettings embedding_http;

  PromptVariant variant = PromptVariant::simple;
  std::size_t workers = 4;
  std::size_t max_concurrent = 4;
  std::size_t per_minute_budget = 0;
  std::size_t embedding_max_concurrent = 4;
  double failure_threshold = 0.05;
  bool strip_urls_mentions = false;
  std::optional<std::string> run_timestamp;

  std::vector<std::string> concepts;  // empty: every registry concept
  std::size_t k = 5;
  std::size_t n_c = 200;
  ScoreField heuristic_field = ScoreField::word;
  std::filesystem::path heuristic_scores;  // empty: the run's own score table

  std::size_t task_size = 20;
  std::size_t target_annotators = 8;
  std::string host = "127.0.0.1";
  int port = 8080;

  std::vector<double> thresholds;  // empty: 0.1 ... 0.9
  double primary_threshold = 0.3;
  std::size_t bootstrap_resamples = 100;
  int min_duration_seconds = 180;
  std::vector<EvaluationModelSpec> evaluation_models;  // empty: word, discourse, SUM
  std::pair<std::string, std::string> comparison{"SUM", "word"};

  AnalysisConfig analysis;

  static RunConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
  static RunConfig load(const std::filesystem::path& path);
};

// Artifact locations under the output directory.
struct Layout {
  std::filesystem::path root;

  std::filesystem::path scores() const { return root / "scores.csv"; }
  std::filesystem::path results_log() const { return root / "results_log.jsonl"; }
  std::filesystem::path run_report() const { return root / "run_report.json"; }
  std::filesystem::path samples_dir() const { return root / "samples"; }
  std::filesystem::path sample(const std::string& concept_name) const {
    return samples_dir() / ("sample_" + concept_name + ".json");
  }
  std::filesystem::path tasks() const { return root / "tasks.json"; }
  std::filesystem::path journal() const { return root / "annotation_journal.jsonl"; }
  std::filesystem::path annotations() const { return root / "annotations.csv"; }
  std::filesystem::path sessions() const { return root / "sessions.csv"; }
  std::filesystem::path evaluation_dir() const { return root / "evaluation"; }
  std::filesystem::path analysis_dir() const { return root / "analysis"; }
  std::filesystem::path report() const { return root / "report.md"; }
};

/// Runs one invocation (args exclude the program name) and returns the exit
/// status: 0 success, 1 runtime failure, 2 usage or configuration error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace metaphor::cli
