#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "metaphor/concept_scores.hpp"
#include "metaphor/corpus.hpp"
#include "metaphor/embedding.hpp"
#include "metaphor/registry.hpp"

namespace metaphor {

struct ConceptCentroid {
  std::string concept_name;
  Embedding centroid;
  std::size_t sentence_count = 0;
  // sha256 over the provider id and the carrier sentences.
  std::string sentence_hash;
};

/// Centroids for every concept of one registry, all from one provider.
struct CentroidSet {
  std::string provider_id;
  std::size_t dimension = 0;
  std::vector<ConceptCentroid> centroids;  // registry order

  const ConceptCentroid* find(std::string_view concept_name) const;
};

/// Componentwise mean. The vectors are summed in lexicographic order, so the
/// result does not depend on the order of the input list.
/// Throws ArgumentError on an empty list or ragged dimensions.
Embedding concept_centroid(const std::vector<Embedding>& sentence_embeddings);

/// dot(a, b) / (|a| |b|), clamped to [-1, 1].
/// Throws ArgumentError on a dimension mismatch or a zero vector.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

std::string carrier_sentence_hash(const Concept& c, const std::string& provider_id);

CentroidSet compute_centroids(EmbeddingProvider& provider, const ConceptRegistry& registry);

/// Centroid cache file (text):
///   metaphor-centroids 1
///   provider <id>
///   dimension <d>
///   concept <name> <sentence-hash> <sentence-count>
///   <d space-separated values>
///   ... one concept/values pair per concept
void save_centroid_cache(const std::filesystem::path& path, const CentroidSet& set);
CentroidSet load_centroid_cache(const std::filesystem::path& path);

// <cache_dir>/centroids-<hash>.txt, where the hash covers the provider id and
// every concept's sentence hash.
std::filesystem::path centroid_cache_path(const std::filesystem::path& cache_dir, const ConceptRegistry& registry,
                                          const std::string& provider_id);

/// Reads the cache entry for (registry, provider) if present and consistent,
/// otherwise computes the centroids and writes the entry. An empty cache_dir
/// disables caching.
CentroidSet load_or_compute_centroids(EmbeddingProvider& provider, const ConceptRegistry& registry,
                                      const std::filesystem::path& cache_dir);

// EMB_c = cosine(doc_embedding, centroid_c) for each centroid, in set order.
ConceptScores discourse_scores(const Embedding& doc_embedding, const CentroidSet& centroids);

/// Embeds doc.text (optionally stripped of URLs and mentions) and scores it.
/// Throws ConfigError if the provider id differs from the centroids'; provider
/// failures propagate as TransportError.
ConceptScores discourse_scores(const Document& doc, EmbeddingProvider& provider, const CentroidSet& centroids,
                               bool strip_urls_mentions = false);

}  // namespace metaphor
