#include <httplib.h>

#include <cstdlib>
#include <json.hpp>

#include "metaphor/errors.hpp"
#include "metaphor/llm_provider.hpp"

namespace metaphor {

HttpLlmProvider::HttpLlmProvider(HttpLlmSettings settings) : settings_(std::move(settings)) {
  const char* key = std::getenv(settings_.api_key_env.c_str());
  if (key == nullptr || *key == '\0') {
    throw ConfigError("environment variable " + settings_.api_key_env + " is not set (required by the HTTP LLM provider)");
  }
  api_key_ = key;
}

std::string HttpLlmProvider::complete(const LlmRequest& request) {
  httplib::Client client(settings_.base_url);
  client.set_connection_timeout(settings_.timeout);
  client.set_read_timeout(settings_.timeout);
  client.set_bearer_token_auth(api_key_);

  const nlohmann::json body = {
      {"model", request.model},
      {"temperature", request.temperature},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", request.prompt}}})},
  };
  auto res = client.Post("/v1/chat/completions", body.dump(), "application/json");
  if (!res) throw TransportError("chat completion request failed: " + httplib::to_string(res.error()));
  if (res->status == 429) {
    std::chrono::milliseconds wait{1000};
    if (res->has_header("Retry-After")) {
      try {
        wait = std::chrono::milliseconds(static_cast<long>(std::stod(res->get_header_value("Retry-After")) * 1000));
      } catch (const std::exception&) {
      }
    }
    throw RateLimitError("rate limited by " + settings_.base_url, wait);
  }
  if (res->status != 200) {
    throw TransportError("chat completion returned HTTP " + std::to_string(res->status));
  }
  try {
    const auto j = nlohmann::json::parse(res->body);
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw TransportError(std::string("unexpected chat completion payload: ") + e.what());
  }
}

}  // namespace metaphor
