#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace metaphor {

class Corpus;

struct ScoreRow {
  std::string doc_id;
  std::string concept_name;
  double word_score = 0.0;
  double discourse_score = 0.0;
  double combined_score = 0.0;
};

struct ScoreProvenance {
  std::string llm_provider;
  std::string model;
  std::string prompt_variant;
  std::string embedding_provider;
  std::string run_timestamp;

  nlohmann::json to_json() const;
  static ScoreProvenance from_json(const nlohmann::json& j);
};

enum class ScoreField { word, discourse, combined };

ScoreField parse_score_field(std::string_view name);
std::string_view to_string(ScoreField f);
double field_value(const ScoreRow& row, ScoreField f);

/// Per-(document, concept) scores of one scoring run.
///
/// Invariants, checked on every insertion: word >= 0, discourse in [-1, 1],
/// combined == word + discourse within 1e-12, (doc, concept) unique.
class ScoreTable {
 public:
  static constexpr double kCombineTolerance = 1e-12;

  ScoreTable() = default;

  // Sets combined = word + discourse.
  void add(std::string doc_id, std::string concept_name, double word, double discourse);
  // Takes combined as given and validates it.
  void add_row(ScoreRow row);

  const std::vector<ScoreRow>& rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }
  const ScoreRow* find(std::string_view doc_id, std::string_view concept_name) const;

  // Distinct values in first-appearance order.
  std::vector<std::string> concepts() const;
  std::vector<std::string> doc_ids() const;
  // Rows for one concept, in table order.
  std::vector<const ScoreRow*> rows_for(std::string_view concept_name) const;

  ScoreProvenance provenance;

 private:
  std::vector<ScoreRow> rows_;
  std::map<std::pair<std::string, std::string>, std::size_t, std::less<>> index_;
};

void validate(const ScoreRow& row);

inline constexpr std::string_view kScoreTableHeader = "doc_id,concept,word_score,discourse_score,combined_score";

std::string score_table_to_csv(const ScoreTable& table);
ScoreTable score_table_from_csv(std::string_view content);

// Writes the CSV at `path` and the provenance next to it as `<path>.meta.json`.
void save_score_table(const std::filesystem::path& path, const ScoreTable& table);
// Reads the CSV; provenance is read from the sidecar when present.
ScoreTable load_score_table(const std::filesystem::path& path);
std::filesystem::path provenance_path(const std::filesystem::path& table_path);

// Document ids in the table that the corpus does not contain.
std::vector<std::string> unknown_documents(const ScoreTable& table, const Corpus& corpus);

}  // namespace metaphor
