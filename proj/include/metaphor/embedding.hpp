#pragma once

#include <chrono>
#include <cstddef>
#include <map>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

namespace metaphor {

using Embedding = std::vector<double>;

// Throws ArgumentError on an empty vector or a NaN/Inf entry.
void validate_embedding(const Embedding& e);

/// Request contract: batch of texts -> batch of equal-dimension vectors, in
/// input order. Failures surface as TransportError. Implementations must be
/// safe to call from several threads at once.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  // Stable identifier; centroids are only comparable with embeddings from a
  // provider with the same id.
  virtual std::string id() const = 0;
  virtual std::vector<Embedding> embed(const std::vector<std::string>& texts) = 0;
};

Embedding embed_one(EmbeddingProvider& provider, const std::string& text);

/// Deterministic feature-hashing embedder for tests and offline runs.
///
/// Each lowercased word (edge punctuation stripped) adds a signed unit weight
/// to one bucket and each of its character trigrams adds half that weight, so
/// texts sharing vocabulary have positive cosine. Never returns a zero vector
/// for non-empty input.
class HashEmbeddingProvider final : public EmbeddingProvider {
 public:
  explicit HashEmbeddingProvider(std::size_t dimension = 384);
  std::string id() const override;
  std::vector<Embedding> embed(const std::vector<std::string>& texts) override;
  Embedding embed_text(std::string_view text) const;
  std::size_t dimension() const { return dimension_; }

 private:
  std::size_t dimension_;
};

/// Returns preset vectors for exact texts; unknown texts raise TransportError.
class FixedEmbeddingProvider final : public EmbeddingProvider {
 public:
  FixedEmbeddingProvider(std::string id, std::map<std::string, Embedding> vectors);
  std::string id() const override { return id_; }
  std::vector<Embedding> embed(const std::vector<std::string>& texts) override;
  std::size_t call_count() const;

 private:
  std::string id_;
  std::map<std::string, Embedding> vectors_;
  mutable std::mutex mu_;
  std::size_t calls_ = 0;
};

struct HttpEmbeddingSettings {
  // The client posts to <base_url>/v1/embeddings (OpenAI-compatible).
  std::string base_url = "https://api.openai.com";
  std::string model = "text-embedding-3-small";
  std::string api_key_env = "OPENAI_API_KEY";
  std::chrono::seconds timeout{60};
  std::size_t batch_size = 64;
};

/// Remote embedding client. The API key is read from the environment at
/// construction; a missing key is a ConfigError.
class HttpEmbeddingProvider final : public EmbeddingProvider {
 public:
  explicit HttpEmbeddingProvider(HttpEmbeddingSettings settings);
  std::string id() const override { return "http:" + settings_.base_url + "#" + settings_.model; }
  std::vector<Embedding> embed(const std::vector<std::string>& texts) override;

 private:
  std::vector<Embedding> embed_batch(const std::vector<std::string>& texts);

  HttpEmbeddingSettings settings_;
  std::string api_key_;
};

/// Optional preprocessing before embedding: removes URLs (http://, https://,
/// www.) and @mentions and collapses whitespace. Returns the input unchanged
/// if nothing would remain.
std::string strip_urls_and_mentions(std::string_view text);

}  // namespace metaphor
