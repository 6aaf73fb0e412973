#include "metaphor/embedding.hpp"

#include <cctype>
#include <cmath>
#include <cstdint>

#include "metaphor/errors.hpp"
#include "metaphor/llm_provider.hpp"
#include "metaphor/simd.hpp"
#include "metaphor/text.hpp"

namespace metaphor {
namespace {

std::uint64_t fnv1a(std::string_view s, std::uint64_t salt) {
  std::uint64_t h = 14695981039346656037ull ^ salt;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  // Final avalanche so low bits depend on every input byte.
  h ^= h >> 33;
  h *= 0xff51afd7ed558ccdull;
  h ^= h >> 33;
  return h;
}

bool is_edge_punct(unsigned char c) { return c < 0x80 && !std::isalnum(c) && c != '#' && c != '@'; }

std::string normalize_word(std::string_view w) {
  std::size_t b = 0, e = w.size();
  while (b < e && is_edge_punct(static_cast<unsigned char>(w[b]))) ++b;
  while (e > b && is_edge_punct(static_cast<unsigned char>(w[e - 1]))) --e;
  return to_lower_ascii(w.substr(b, e - b));
}

}  // namespace

void validate_embedding(const Embedding& e) {
  if (e.empty()) throw ArgumentError("embedding has dimension 0");
  for (double v : e) {
    if (!std::isfinite(v)) throw ArgumentError("embedding contains a NaN or infinite entry");
  }
}

Embedding embed_one(EmbeddingProvider& provider, const std::string& text) {
  auto out = provider.embed({text});
  if (out.size() != 1) throw TransportError("embedding provider returned " + std::to_string(out.size()) + " vectors for 1 text");
  return std::move(out.front());
}

HashEmbeddingProvider::HashEmbeddingProvider(std::size_t dimension) : dimension_(dimension) {
  if (dimension_ == 0) throw ArgumentError("embedding dimension must be positive");
}

std::string HashEmbeddingProvider::id() const { return "hash-mock-v1-d" + std::to_string(dimension_); }

Embedding HashEmbeddingProvider::embed_text(std::string_view text) const {
  Embedding v(dimension_, 0.0);
  auto add = [&](std::string_view feature, std::uint64_t salt, double weight) {
    const auto h = fnv1a(feature, salt);
    const double sign = (h >> 63) != 0 ? -1.0 : 1.0;
    v[h % dimension_] += sign * weight;
  };
  for (auto raw : split_whitespace(text)) {
    const auto word = normalize_word(raw);
    if (word.empty()) continue;
    add(word, 1, 1.0);
    const std::string padded = "<" + word + ">";
    for (std::size_t i = 0; i + 3 <= padded.size(); ++i) add(std::string_view(padded).substr(i, 3), 2, 0.5);
  }
  if (simd::squared_norm(v) == 0.0) add(text, 3, 1.0);
  return v;
}

std::vector<Embedding> HashEmbeddingProvider::embed(const std::vector<std::string>& texts) {
  std::vector<Embedding> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(embed_text(t));
  return out;
}

FixedEmbeddingProvider::FixedEmbeddingProvider(std::string id, std::map<std::string, Embedding> vectors)
    : id_(std::move(id)), vectors_(std::move(vectors)) {}

std::vector<Embedding> FixedEmbeddingProvider::embed(const std::vector<std::string>& texts) {
  {
    std::lock_guard lock(mu_);
    ++calls_;
  }
  std::vector<Embedding> out;
  out.reserve(texts.size());
  for (const auto& t : texts) {
    auto it = vectors_.find(t);
    if (it == vectors_.end()) throw TransportError("no preset embedding for text '" + t + "'");
    out.push_back(it->second);
  }
  return out;
}

std::size_t FixedEmbeddingProvider::call_count() const {
  std::lock_guard lock(mu_);
  return calls_;
}

std::string strip_urls_and_mentions(std::string_view text) {
  std::vector<std::string> kept;
  for (auto w : split_whitespace(text)) {
    const auto lower = to_lower_ascii(w);
    if (lower.starts_with("http://") || lower.starts_with("https://") || lower.starts_with("www.")) continue;
    if (w.size() > 1 && w.front() == '@') continue;
    kept.emplace_back(w);
  }
  if (kept.empty()) return std::string(text);
  return join(kept, " ");
}

}  // namespace metaphor
