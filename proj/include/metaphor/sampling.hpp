#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "metaphor/score_table.hpp"

namespace metaphor {

struct StratificationPlan {
  std::string concept_name;
  std::size_t k = 5;
  std::size_t n_c = 200;
  std::uint64_t seed = 0;
  // Which score of the heuristic table drives stratification.
  ScoreField heuristic_field = ScoreField::word;

  // Throws ArgumentError unless k >= 2, n_c > 0 and k divides n_c.
  void validate() const;
};

struct Stratum {
  std::size_t index = 0;
  // Document ids ordered by (score, id).
  std::vector<std::string> members;
  double min_score = 0.0;
  double max_score = 0.0;
};

/// Q_0 holds the documents whose heuristic score is exactly 0. Documents with
/// a positive score, sorted by (score, id), are cut into k - 1 runs of equal
/// count; when tied scores straddle a cut, the tied documents all stay in the
/// lower stratum. Negative scores (possible only for discourse-based fields)
/// belong to no stratum.
std::vector<Stratum> build_strata(const ScoreTable& table, const std::string& concept_name, ScoreField field,
                                  std::size_t k);

struct SampledItem {
  std::string doc_id;
  std::size_t stratum = 0;

  friend bool operator==(const SampledItem&, const SampledItem&) = default;
};

struct SampleManifest {
  StratificationPlan plan;
  // Provenance of the heuristic table ("<llm>/<model>/<variant>/<embedding>").
  std::string heuristic_source;
  std::vector<std::size_t> stratum_sizes;
  std::vector<SampledItem> items;

  std::vector<std::string> ids() const;
  nlohmann::ordered_json to_json() const;
  static SampleManifest from_json(const nlohmann::json& j);
};

/// Draws n_c / k ids uniformly without replacement from each stratum, using a
/// generator seeded with plan.seed. Items are listed stratum by stratum in
/// draw order. Throws ArgumentError when the concept is absent from the table
/// or a stratum holds fewer than n_c / k documents (naming the stratum).
SampleManifest stratified_sample(const ScoreTable& table, const StratificationPlan& plan);

void save_sample_manifest(const std::filesystem::path& path, const SampleManifest& manifest);
SampleManifest load_sample_manifest(const std::filesystem::path& path);

}  // namespace metaphor
