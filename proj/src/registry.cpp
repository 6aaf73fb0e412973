#include "metaphor/registry.hpp"

#include <set>

#include "metaphor/errors.hpp"
#include "metaphor/text.hpp"

namespace metaphor {

std::string canonical_concept_name(std::string_view surface) { return to_lower_ascii(trim(surface)); }

ConceptRegistry::ConceptRegistry(std::vector<Concept> concepts, std::map<std::string, std::string> aliases) {
  std::set<std::string> seen;
  for (auto& c : concepts) {
    c.name = canonical_concept_name(c.name);
    if (c.name.empty()) throw ArgumentError("concept with empty name");
    if (!seen.insert(c.name).second) throw ArgumentError("duplicate concept name '" + c.name + "'");
    if (c.carrier_sentences.empty()) throw ArgumentError("concept '" + c.name + "' has no carrier sentences");
    for (const auto& s : c.carrier_sentences) {
      if (trim(s).empty()) throw ArgumentError("concept '" + c.name + "' has an empty carrier sentence");
    }
  }
  concepts_ = std::move(concepts);
  for (const auto& [from, to] : aliases) {
    const auto key = canonical_concept_name(from);
    const auto target = canonical_concept_name(to);
    if (!seen.count(target)) throw ArgumentError("alias '" + from + "' targets unknown concept '" + to + "'");
    if (seen.count(key) && key != target) {
      throw ArgumentError("alias '" + from + "' shadows concept '" + key + "'");
    }
    aliases_[key] = target;
  }
}

std::vector<std::string> ConceptRegistry::names() const {
  std::vector<std::string> out;
  out.reserve(concepts_.size());
  for (const auto& c : concepts_) out.push_back(c.name);
  return out;
}

std::optional<std::size_t> ConceptRegistry::index_of(std::string_view surface) const {
  auto key = canonical_concept_name(surface);
  if (auto it = aliases_.find(key); it != aliases_.end()) key = it->second;
  for (std::size_t i = 0; i < concepts_.size(); ++i) {
    if (concepts_[i].name == key) return i;
  }
  return std::nullopt;
}

std::optional<std::string> ConceptRegistry::resolve(std::string_view surface) const {
  auto idx = index_of(surface);
  if (!idx) return std::nullopt;
  return concepts_[*idx].name;
}

const Concept* ConceptRegistry::find(std::string_view surface) const {
  auto idx = index_of(surface);
  return idx ? &concepts_[*idx] : nullptr;
}

const Concept& ConceptRegistry::at(std::string_view surface) const {
  const auto* c = find(surface);
  if (!c) throw ArgumentError("unknown concept '" + std::string(surface) + "'");
  return *c;
}

nlohmann::json ConceptRegistry::to_json() const {
  nlohmann::json j;
  j["concepts"] = nlohmann::json::array();
  for (const auto& c : concepts_) {
    j["concepts"].push_back(
        {{"name", c.name}, {"description", c.description}, {"carrier_sentences", c.carrier_sentences}});
  }
  j["aliases"] = aliases_;
  return j;
}

ConceptRegistry ConceptRegistry::from_json(const nlohmann::json& j) {
  try {
    std::vector<Concept> concepts;
    for (const auto& c : j.at("concepts")) {
      Concept concept_name;
      concept_name.name = c.at("name").get<std::string>();
      concept_name.description = c.value("description", std::string());
      concept_name.carrier_sentences = c.at("carrier_sentences").get<std::vector<std::string>>();
      concepts.push_back(std::move(concept_name));
    }
    std::map<std::string, std::string> aliases;
    if (j.contains("aliases")) aliases = j.at("aliases").get<std::map<std::string, std::string>>();
    return ConceptRegistry(std::move(concepts), std::move(aliases));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed concept registry: ") + e.what());
  }
}

ConceptRegistry load_concept_registry(const std::filesystem::path& path) {
  const auto content = read_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(content);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("registry '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return ConceptRegistry::from_json(j);
}

void save_concept_registry(const std::filesystem::path& path, const ConceptRegistry& registry) {
  write_file(path, registry.to_json().dump(2) + "\n");
}

}  // namespace metaphor
