#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace metaphor {

// A source-domain concept and the carrier sentences that evoke it.
struct Concept {
  std::string name;
  std::string description;
  std::vector<std::string> carrier_sentences;
};

/// Ordered set of concepts plus surface-name aliases.
///
/// Names are canonical (lowercase, trimmed). Lookups through `resolve` apply
/// the same canonicalization to the query and then the alias map, so
/// "Physical Pressure", " pressure " and "pressure" all resolve to `pressure`.
class ConceptRegistry {
 public:
  ConceptRegistry() = default;
  // Throws ArgumentError on duplicate names, empty carrier lists or aliases
  // that point at unknown concepts.
  ConceptRegistry(std::vector<Concept> concepts, std::map<std::string, std::string> aliases);

  const std::vector<Concept>& concepts() const { return concepts_; }
  const std::map<std::string, std::string>& aliases() const { return aliases_; }
  std::vector<std::string> names() const;
  std::size_t size() const { return concepts_.size(); }

  std::optional<std::string> resolve(std::string_view surface) const;
  const Concept* find(std::string_view surface) const;
  const Concept& at(std::string_view surface) const;
  std::optional<std::size_t> index_of(std::string_view surface) const;

  nlohmann::json to_json() const;
  static ConceptRegistry from_json(const nlohmann::json& j);

 private:
  std::vector<Concept> concepts_;
  std::map<std::string, std::string> aliases_;
};

// Lowercase + trim.
std::string canonical_concept_name(std::string_view surface);

ConceptRegistry load_concept_registry(const std::filesystem::path& path);
void save_concept_registry(const std::filesystem::path& path, const ConceptRegistry& registry);

/// The seven immigration source domains with their carrier sentences.
///
/// The carrier-sentence table has 103 rows (animal 19, vermin 16, parasite 8,
/// pressure 12, water 22, commodity 14, war 12) although the accompanying
/// prose mentions 104; the table is reproduced as printed, including the
/// missing final period on "They are caught in the crosshairs".
const ConceptRegistry& default_registry();

}  // namespace metaphor
