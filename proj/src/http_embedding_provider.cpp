#include <httplib.h>

#include <algorithm>
#include <cstdlib>
#include <json.hpp>

#include "metaphor/embedding.hpp"
#include "metaphor/errors.hpp"
#include "metaphor/llm_provider.hpp"

namespace metaphor {

HttpEmbeddingProvider::HttpEmbeddingProvider(HttpEmbeddingSettings settings) : settings_(std::move(settings)) {
  if (settings_.batch_size == 0) throw ConfigError("embedding batch size must be positive");
  const char* key = std::getenv(settings_.api_key_env.c_str());
  if (key == nullptr || *key == '\0') {
    throw ConfigError("environment variable " + settings_.api_key_env +
                      " is not set (required by the HTTP embedding provider)");
  }
  api_key_ = key;
}

std::vector<Embedding> HttpEmbeddingProvider::embed(const std::vector<std::string>& texts) {
  std::vector<Embedding> out;
  out.reserve(texts.size());
  for (std::size_t i = 0; i < texts.size(); i += settings_.batch_size) {
    const auto end = std::min(texts.size(), i + settings_.batch_size);
    auto batch = embed_batch(std::vector<std::string>(texts.begin() + static_cast<std::ptrdiff_t>(i),
                                                      texts.begin() + static_cast<std::ptrdiff_t>(end)));
    for (auto& e : batch) out.push_back(std::move(e));
  }
  return out;
}

std::vector<Embedding> HttpEmbeddingProvider::embed_batch(const std::vector<std::string>& texts) {
  httplib::Client client(settings_.base_url);
  client.set_connection_timeout(settings_.timeout);
  client.set_read_timeout(settings_.timeout);
  client.set_bearer_token_auth(api_key_);

  const nlohmann::json body = {{"model", settings_.model}, {"input", texts}};
  auto res = client.Post("/v1/embeddings", body.dump(), "application/json");
  if (!res) throw TransportError("embedding request failed: " + httplib::to_string(res.error()));
  if (res->status == 429) throw RateLimitError("rate limited by " + settings_.base_url, std::chrono::milliseconds(1000));
  if (res->status != 200) throw TransportError("embedding request returned HTTP " + std::to_string(res->status));

  std::vector<Embedding> out(texts.size());
  try {
    const auto j = nlohmann::json::parse(res->body);
    const auto& data = j.at("data");
    if (data.size() != texts.size()) throw TransportError("embedding response has the wrong number of vectors");
    for (std::size_t k = 0; k < data.size(); ++k) {
      const auto idx = data[k].contains("index") ? data[k].at("index").get<std::size_t>() : k;
      if (idx >= out.size()) throw TransportError("embedding response index out of range");
      out[idx] = data[k].at("embedding").get<Embedding>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw TransportError(std::string("unexpected embedding payload: ") + e.what());
  }
  for (const auto& e : out) {
    if (e.size() != out.front().size()) throw TransportError("embedding response has ragged dimensions");
    validate_embedding(e);
  }
  return out;
}

}  // namespace metaphor
