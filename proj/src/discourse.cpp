#include "metaphor/discourse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "metaphor/errors.hpp"
#include "metaphor/llm_provider.hpp"
#include "metaphor/simd.hpp"
#include "metaphor/text.hpp"

namespace metaphor {

const ConceptCentroid* CentroidSet::find(std::string_view concept_name) const {
  for (const auto& c : centroids) {
    if (c.concept_name == concept_name) return &c;
  }
  return nullptr;
}

Embedding concept_centroid(const std::vector<Embedding>& sentence_embeddings) {
  if (sentence_embeddings.empty()) throw ArgumentError("cannot average an empty list of embeddings");
  const auto dim = sentence_embeddings.front().size();
  if (dim == 0) throw ArgumentError("embedding has dimension 0");
  for (const auto& e : sentence_embeddings) {
    if (e.size() != dim) throw ArgumentError("embeddings have ragged dimensions");
  }
  std::vector<std::size_t> order(sentence_embeddings.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return sentence_embeddings[a] < sentence_embeddings[b]; });
  Embedding sum(dim, 0.0);
  for (auto i : order) simd::accumulate(sum, sentence_embeddings[i]);
  simd::scale(sum, 1.0 / static_cast<double>(sentence_embeddings.size()));
  return sum;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ArgumentError("cosine of vectors with dimensions " + std::to_string(a.size()) + " and " +
                        std::to_string(b.size()));
  }
  const double na = simd::squared_norm(a);
  const double nb = simd::squared_norm(b);
  if (na == 0.0 || nb == 0.0) throw ArgumentError("cosine similarity of a zero vector");
  const double c = simd::dot(a, b) / (std::sqrt(na) * std::sqrt(nb));
  return std::clamp(c, -1.0, 1.0);
}

std::string carrier_sentence_hash(const Concept& c, const std::string& provider_id) {
  std::string payload = provider_id;
  payload += '\n';
  payload += c.name;
  for (const auto& s : c.carrier_sentences) {
    payload += '\n';
    payload += s;
  }
  return sha256_hex(payload);
}

CentroidSet compute_centroids(EmbeddingProvider& provider, const ConceptRegistry& registry) {
  CentroidSet set;
  set.provider_id = provider.id();
  for (const auto& c : registry.concepts()) {
    auto embeddings = provider.embed(c.carrier_sentences);
    if (embeddings.size() != c.carrier_sentences.size()) {
      throw TransportError("embedding provider returned the wrong number of vectors for '" + c.name + "'");
    }
    for (const auto& e : embeddings) validate_embedding(e);
    ConceptCentroid cc{c.name, concept_centroid(embeddings), c.carrier_sentences.size(),
                       carrier_sentence_hash(c, set.provider_id)};
    if (set.dimension == 0) set.dimension = cc.centroid.size();
    if (cc.centroid.size() != set.dimension) throw ArgumentError("centroid dimensions differ across concepts");
    set.centroids.push_back(std::move(cc));
  }
  return set;
}

ConceptScores discourse_scores(const Embedding& doc_embedding, const CentroidSet& centroids) {
  validate_embedding(doc_embedding);
  ConceptScores out;
  out.reserve(centroids.centroids.size());
  for (const auto& c : centroids.centroids) out.push_back({c.concept_name, cosine_similarity(doc_embedding, c.centroid)});
  return out;
}

ConceptScores discourse_scores(const Document& doc, EmbeddingProvider& provider, const CentroidSet& centroids,
                               bool strip_urls_mentions) {
  if (provider.id() != centroids.provider_id) {
    throw ConfigError("centroids were computed with provider '" + centroids.provider_id +
                      "' but documents are embedded with '" + provider.id() + "'");
  }
  const auto text = strip_urls_mentions ? strip_urls_and_mentions(doc.text) : doc.text;
  return discourse_scores(embed_one(provider, text), centroids);
}

}  // namespace metaphor
