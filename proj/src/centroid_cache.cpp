#include "metaphor/discourse.hpp"
#include "metaphor/errors.hpp"
#include "metaphor/text.hpp"

namespace metaphor {
namespace {

constexpr std::string_view kMagic = "metaphor-centroids 1";

[[noreturn]] void bad_cache(const std::filesystem::path& path, const std::string& why) {
  throw FormatError("centroid cache " + path.string() + ": " + why);
}

}  // namespace

void save_centroid_cache(const std::filesystem::path& path, const CentroidSet& set) {
  std::string out;
  out += kMagic;
  out += "\nprovider " + set.provider_id + "\ndimension " + std::to_string(set.dimension) + "\n";
  for (const auto& c : set.centroids) {
    out += "concept " + c.concept_name + " " + c.sentence_hash + " " + std::to_string(c.sentence_count) + "\n";
    for (std::size_t i = 0; i < c.centroid.size(); ++i) {
      if (i > 0) out += ' ';
      out += format_double(c.centroid[i]);
    }
    out += '\n';
  }
  write_file_atomic(path, out);
}

CentroidSet load_centroid_cache(const std::filesystem::path& path) {
  const auto content = read_file(path);
  const auto lines = split(content, '\n');
  std::size_t i = 0;
  auto next = [&]() -> std::string_view {
    if (i >= lines.size()) bad_cache(path, "truncated");
    return lines[i++];
  };
  if (next() != kMagic) bad_cache(path, "missing header");
  CentroidSet set;
  auto provider = next();
  if (!provider.starts_with("provider ")) bad_cache(path, "missing provider line");
  set.provider_id = std::string(provider.substr(9));
  auto dim = next();
  if (!dim.starts_with("dimension ")) bad_cache(path, "missing dimension line");
  set.dimension = static_cast<std::size_t>(parse_double(dim.substr(10)));
  while (i < lines.size() && !lines[i].empty()) {
    // concept <name, possibly with spaces> <hash> <count>
    const auto head = next();
    const auto count_at = head.rfind(' ');
    const auto hash_at = count_at == std::string_view::npos ? count_at : head.rfind(' ', count_at - 1);
    if (!head.starts_with("concept ") || hash_at == std::string_view::npos || hash_at < 8) {
      bad_cache(path, "malformed concept line " + std::to_string(i));
    }
    ConceptCentroid c;
    c.concept_name = std::string(head.substr(8, hash_at - 8));
    c.sentence_hash = std::string(head.substr(hash_at + 1, count_at - hash_at - 1));
    c.sentence_count = static_cast<std::size_t>(parse_double(head.substr(count_at + 1)));
    for (auto v : split_whitespace(next())) c.centroid.push_back(parse_double(v));
    if (c.centroid.size() != set.dimension) bad_cache(path, "centroid for '" + c.concept_name + "' has the wrong dimension");
    set.centroids.push_back(std::move(c));
  }
  return set;
}

std::filesystem::path centroid_cache_path(const std::filesystem::path& cache_dir, const ConceptRegistry& registry,
                                          const std::string& provider_id) {
  std::string key = provider_id;
  for (const auto& c : registry.concepts()) key += "\n" + carrier_sentence_hash(c, provider_id);
  return cache_dir / ("centroids-" + sha256_hex(key).substr(0, 16) + ".txt");
}

CentroidSet load_or_compute_centroids(EmbeddingProvider& provider, const ConceptRegistry& registry,
                                      const std::filesystem::path& cache_dir) {
  if (cache_dir.empty()) return compute_centroids(provider, registry);
  const auto id = provider.id();
  const auto path = centroid_cache_path(cache_dir, registry, id);
  if (std::filesystem::exists(path)) {
    try {
      auto cached = load_centroid_cache(path);
      bool consistent = cached.provider_id == id && cached.centroids.size() == registry.size();
      for (std::size_t k = 0; consistent && k < registry.size(); ++k) {
        const auto& c = registry.concepts()[k];
        consistent = cached.centroids[k].concept_name == c.name &&
                     cached.centroids[k].sentence_hash == carrier_sentence_hash(c, id);
      }
      if (consistent) return cached;
    } catch (const FormatError&) {
      // Unreadable entries are recomputed and overwritten.
    }
  }
  auto set = compute_centroids(provider, registry);
  save_centroid_cache(path, set);
  return set;
}

}  // namespace metaphor
