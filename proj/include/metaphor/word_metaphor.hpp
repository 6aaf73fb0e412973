#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "metaphor/concept_scores.hpp"
#include "metaphor/corpus.hpp"
#include "metaphor/llm_provider.hpp"
#include "metaphor/prompts.hpp"
#include "metaphor/registry.hpp"

namespace metaphor {

class RequestGate;

inline constexpr std::string_view kNoConcept = "none";

/// Metaphorical expression -> canonical concept name (or "none"), in the
/// order the model listed them. Keys are unique; the first occurrence wins.
class ExpressionMap {
 public:
  using Entry = std::pair<std::string, std::string>;

  // Returns false (and keeps the earlier value) if the key already exists.
  bool insert(std::string expression, std::string concept_name);
  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::string* find(std::string_view expression) const;
  // Number of entries whose value is `concept`.
  std::size_t count(std::string_view concept_name) const;

  friend bool operator==(const ExpressionMap&, const ExpressionMap&) = default;

 private:
  std::vector<Entry> entries_;
};

// JSON object text, keys in map order.
std::string serialize(const ExpressionMap& map);

/// Extracts the first JSON object literal from a model response.
///
/// Prose and code fences around the object are ignored. Values are
/// canonicalized through the registry (lowercase, trim, aliases); values that
/// do not resolve to a known concept, and non-string values, become "none".
/// Empty keys are dropped. When the first pass fails, one cleanup pass
/// normalizes typographic quotes and trailing commas and retries; nullopt
/// means no parseable object was found.
std::optional<ExpressionMap> parse_extraction(std::string_view raw, const ConceptRegistry& registry);

// Maximal runs of non-whitespace characters; URLs and mentions count.
std::size_t count_tokens(std::string_view text);

/// count(c) / ln(token_count + 1) for each registry concept. Entries mapped to
/// "none" contribute to no concept. Throws ArgumentError if token_count == 0.
ConceptScores word_level_scores(const ExpressionMap& map, std::size_t token_count,
                                const ConceptRegistry& registry);

enum class ExtractionStatus { ok, recovered, failed_empty, failed };

std::string_view to_string(ExtractionStatus s);
ExtractionStatus parse_extraction_status(std::string_view s);

struct WordLevelResult {
  std::string doc_id;
  ExpressionMap expressions;
  std::vector<std::size_t> counts;  // registry order
  std::size_t token_count = 1;
  ConceptScores scores;
  ExtractionStatus status = ExtractionStatus::ok;
  std::string error;  // transport failure message when status == failed
  std::size_t attempts = 0;
};

struct LlmProviderConfig {
  std::string provider_id = "mock";
  std::string model = "mock-model";
  double temperature = 0.0;
  // Extra attempts after a response that does not parse.
  int max_retries = 1;
  // Extra attempts after a transport failure or rate-limit signal.
  int max_transport_retries = 3;
  std::chrono::milliseconds backoff_base{500};
  std::chrono::seconds timeout{60};

  void validate() const;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;
Sleeper real_sleeper();

/// build_prompt -> provider -> parse_extraction (retrying unparseable
/// responses up to max_retries) -> word_level_scores.
///
/// A response that never parses yields an empty map with status failed_empty.
/// Transport failures are retried with exponential backoff (honoring any
/// retry-after from a rate-limit signal); when retries run out the result has
/// status failed and all-zero scores. Only non-transport exceptions propagate.
WordLevelResult extract(LlmProvider& provider, const LlmProviderConfig& config, PromptVariant variant,
                        const Document& doc, const ConceptRegistry& registry, RequestGate* gate = nullptr,
                        const Sleeper& sleep = real_sleeper());

}  // namespace metaphor
