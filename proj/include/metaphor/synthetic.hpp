#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "metaphor/annotation.hpp"
#include "metaphor/corpus.hpp"
#include "metaphor/registry.hpp"

namespace metaphor {

struct SyntheticConfig {
  std::size_t documents = 400;
  std::uint64_t seed = 0;
  // Share of documents with no metaphorical content at all.
  double literal_share = 0.3;
  // Share of documents whose ideology estimate is missing.
  double missing_ideal_point = 0.03;
  // Share of responses that need the parser's retry (garbage first answer).
  double garbage_share = 0.02;
};

using LatentKey = std::pair<std::string, std::string>;  // doc id, concept

/// Posts generated from a latent metaphoricity m in [0, 1] per (document,
/// concept). Each document has one focal concept; its text mixes neutral
/// filler with m-proportional vocabulary from that concept's carrier
/// sentences, and with probability min(1, 0.3 + m) an explicit carrier word
/// (occasionally two) that the scripted model response reports. Every other
/// concept has m = 0.
struct SyntheticCorpus {
  std::vector<Document> documents;
  // doc id -> responses for ScriptedLlmProvider.
  std::map<std::string, std::vector<std::string>> llm_script;
  std::map<LatentKey, double> latent;

  double latent_of(const std::string& doc_id, const std::string& concept_name) const;
};

SyntheticCorpus generate_synthetic_corpus(const ConceptRegistry& registry, const SyntheticConfig& config);

struct SimulatedAnnotations {
  std::vector<AnnotationRecord> records;
  std::vector<AnnotatorSession> sessions;
};

struct AnnotatorSimulation {
  std::size_t annotators_per_task = 8;
  std::uint64_t seed = 0;
  // Seconds between consecutive judgments of one session.
  int seconds_per_item = 20;
  double dont_know_rate = 0.05;
  // Probability of a yes when m = 0.
  double false_positive_rate = 0.03;
  TimePoint start{};
};

/// Each annotator answers yes with probability 1 / (1 + exp(-8 (m - 0.45)))
/// (false_positive_rate when m = 0), and dont_know at dont_know_rate.
/// Sessions run back to back from `start` with fixed per-item spacing.
SimulatedAnnotations simulate_annotations(const std::map<LatentKey, double>& latent,
                                          const std::vector<AnnotationTask>& tasks,
                                          const AnnotatorSimulation& sim);

// latent.csv: doc_id,concept,latent
std::string latent_to_csv(const std::map<LatentKey, double>& latent);
std::map<LatentKey, double> latent_from_csv(std::string_view content);

// corpus.jsonl, llm_script.jsonl and latent.csv under dir.
void write_synthetic_corpus(const std::filesystem::path& dir, const SyntheticCorpus& corpus);

}  // namespace metaphor
