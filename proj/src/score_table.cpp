#include "metaphor/score_table.hpp"

#include <cmath>
#include <set>

#include "metaphor/corpus.hpp"
#include "metaphor/csv.hpp"
#include "metaphor/errors.hpp"
#include "metaphor/text.hpp"

namespace metaphor {

nlohmann::json ScoreProvenance::to_json() const {
  return {{"llm_provider", llm_provider},
          {"model", model},
          {"prompt_variant", prompt_variant},
          {"embedding_provider", embedding_provider},
          {"run_timestamp", run_timestamp}};
}

ScoreProvenance ScoreProvenance::from_json(const nlohmann::json& j) {
  ScoreProvenance p;
  p.llm_provider = j.value("llm_provider", std::string());
  p.model = j.value("model", std::string());
  p.prompt_variant = j.value("prompt_variant", std::string());
  p.embedding_provider = j.value("embedding_provider", std::string());
  p.run_timestamp = j.value("run_timestamp", std::string());
  return p;
}

ScoreField parse_score_field(std::string_view name) {
  const auto n = to_lower_ascii(trim(name));
  if (n == "word" || n == "word_score" || n == "llm") return ScoreField::word;
  if (n == "discourse" || n == "discourse_score" || n == "emb") return ScoreField::discourse;
  if (n == "combined" || n == "combined_score" || n == "sum") return ScoreField::combined;
  throw ArgumentError("unknown score field '" + std::string(name) + "'");
}

std::string_view to_string(ScoreField f) {
  switch (f) {
    case ScoreField::word:
      return "word";
    case ScoreField::discourse:
      return "discourse";
    case ScoreField::combined:
      return "combined";
  }
  return "combined";
}

double field_value(const ScoreRow& row, ScoreField f) {
  switch (f) {
    case ScoreField::word:
      return row.word_score;
    case ScoreField::discourse:
      return row.discourse_score;
    case ScoreField::combined:
      return row.combined_score;
  }
  return row.combined_score;
}

void validate(const ScoreRow& row) {
  const std::string where = " for (" + row.doc_id + ", " + row.concept_name + ")";
  if (row.doc_id.empty() || row.concept_name.empty()) throw ArgumentError("score row with empty key");
  if (!std::isfinite(row.word_score) || row.word_score < 0.0) {
    throw ArgumentError("word score must be finite and >= 0" + where);
  }
  if (!std::isfinite(row.discourse_score) || row.discourse_score < -1.0 || row.discourse_score > 1.0) {
    throw ArgumentError("discourse score outside [-1, 1]" + where);
  }
  if (std::abs(row.combined_score - (row.word_score + row.discourse_score)) > ScoreTable::kCombineTolerance) {
    throw ArgumentError("combined score is not word + discourse" + where);
  }
}

void ScoreTable::add(std::string doc_id, std::string concept_name, double word, double discourse) {
  ScoreRow row{std::move(doc_id), std::move(concept_name), word, discourse, word + discourse};
  add_row(std::move(row));
}

void ScoreTable::add_row(ScoreRow row) {
  validate(row);
  auto key = std::make_pair(row.doc_id, row.concept_name);
  if (index_.count(key)) throw ArgumentError("duplicate score row (" + row.doc_id + ", " + row.concept_name + ")");
  index_.emplace(std::move(key), rows_.size());
  rows_.push_back(std::move(row));
}

const ScoreRow* ScoreTable::find(std::string_view doc_id, std::string_view concept_name) const {
  auto it = index_.find(std::make_pair(std::string(doc_id), std::string(concept_name)));
  return it == index_.end() ? nullptr : &rows_[it->second];
}

std::vector<std::string> ScoreTable::concepts() const {
  std::vector<std::string> out;
  std::set<std::string_view> seen;
  for (const auto& r : rows_) {
    if (seen.insert(r.concept_name).second) out.push_back(r.concept_name);
  }
  return out;
}

std::vector<std::string> ScoreTable::doc_ids() const {
  std::vector<std::string> out;
  std::set<std::string_view> seen;
  for (const auto& r : rows_) {
    if (seen.insert(r.doc_id).second) out.push_back(r.doc_id);
  }
  return out;
}

std::vector<const ScoreRow*> ScoreTable::rows_for(std::string_view concept_name) const {
  std::vector<const ScoreRow*> out;
  for (const auto& r : rows_) {
    if (r.concept_name == concept_name) out.push_back(&r);
  }
  return out;
}

std::string score_table_to_csv(const ScoreTable& table) {
  std::string out(kScoreTableHeader);
  out += '\n';
  for (const auto& r : table.rows()) {
    out += csv::row({r.doc_id, r.concept_name, format_double(r.word_score), format_double(r.discourse_score),
                     format_double(r.combined_score)});
  }
  return out;
}

ScoreTable score_table_from_csv(std::string_view content) {
  auto rows = csv::parse(content);
  if (rows.empty()) throw FormatError("score table is empty (missing header)");
  csv::Header header(rows.front());
  const auto doc = header.require("doc_id");
  const auto concept_name = header.require("concept");
  const auto word = header.require("word_score");
  const auto disc = header.require("discourse_score");
  const auto comb = header.require("combined_score");
  ScoreTable table;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& f = rows[i];
    if (f.size() == 1 && trim(f[0]).empty()) continue;
    if (f.size() != header.names().size()) {
      throw FormatError("score table row " + std::to_string(i + 1) + " has " + std::to_string(f.size()) +
                        " fields");
    }
    try {
      table.add_row({f[doc], f[concept_name], parse_double(f[word]), parse_double(f[disc]), parse_double(f[comb])});
    } catch (const ArgumentError& e) {
      throw FormatError("score table row " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return table;
}

std::filesystem::path provenance_path(const std::filesystem::path& table_path) {
  auto p = table_path;
  p += ".meta.json";
  return p;
}

void save_score_table(const std::filesystem::path& path, const ScoreTable& table) {
  write_file(path, score_table_to_csv(table));
  write_file(provenance_path(path), table.provenance.to_json().dump(2) + "\n");
}

ScoreTable load_score_table(const std::filesystem::path& path) {
  auto table = score_table_from_csv(read_file(path));
  const auto meta = provenance_path(path);
  if (std::filesystem::exists(meta)) {
    try {
      table.provenance = ScoreProvenance::from_json(nlohmann::json::parse(read_file(meta)));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("malformed provenance file '" + meta.string() + "': " + e.what());
    }
  }
  return table;
}

std::vector<std::string> unknown_documents(const ScoreTable& table, const Corpus& corpus) {
  std::vector<std::string> out;
  for (const auto& id : table.doc_ids()) {
    if (!corpus.contains(id)) out.push_back(id);
  }
  return out;
}

}  // namespace metaphor
