#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

namespace metaphor {

struct LlmRequest {
  std::string model;
  double temperature = 0.0;
  std::string prompt;
  // Routing tag for scripted providers; never sent to a remote service.
  std::string doc_id;
};

// The call did not produce a response (network error, 5xx, missing fixture).
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The provider asked us to slow down.
class RateLimitError : public TransportError {
 public:
  RateLimitError(const std::string& what, std::chrono::milliseconds retry_after)
      : TransportError(what), retry_after_(retry_after) {}
  std::chrono::milliseconds retry_after() const { return retry_after_; }

 private:
  std::chrono::milliseconds retry_after_;
};

/// Request contract: (model, temperature, prompt) -> full response text.
/// Implementations must be safe to call from several threads at once.
class LlmProvider {
 public:
  virtual ~LlmProvider() = default;
  virtual std::string id() const = 0;
  virtual std::string complete(const LlmRequest& request) = 0;
};

/// Canned responses keyed by document id, read from a JSONL fixture:
///   {"doc_id": "d1", "responses": ["garbage", "{\"flooding\": \"water\"}"]}
/// or {"doc_id": "d1", "response": "..."}.
/// The n-th call for a document returns the n-th response; once the script is
/// exhausted the last response repeats. A response string equal to
/// "!transport-error" or "!rate-limit" raises the corresponding error instead.
/// Documents with no entry raise TransportError.
class ScriptedLlmProvider final : public LlmProvider {
 public:
  ScriptedLlmProvider() = default;
  explicit ScriptedLlmProvider(std::map<std::string, std::vector<std::string>> script);
  static ScriptedLlmProvider from_file(const std::filesystem::path& path);

  std::string id() const override { return "mock"; }
  std::string complete(const LlmRequest& request) override;

  void set_script(const std::string& doc_id, std::vector<std::string> responses);
  std::size_t call_count() const;
  std::size_t call_count(const std::string& doc_id) const;

 private:
  mutable std::mutex mu_;
  std::map<std::string, std::vector<std::string>> script_;
  std::map<std::string, std::size_t> calls_;
  std::size_t total_calls_ = 0;
};

// Reads the JSONL fixture format described above; FormatError names the line.
std::map<std::string, std::vector<std::string>> load_llm_script(const std::filesystem::path& path);
void save_llm_script(const std::filesystem::path& path,
                     const std::map<std::string, std::vector<std::string>>& script);

struct HttpLlmSettings {
  // e.g. https://api.openai.com ; the client posts to <base_url>/v1/chat/completions
  std::string base_url = "https://api.openai.com";
  std::string api_key_env = "OPENAI_API_KEY";
  std::chrono::seconds timeout{60};
};

/// OpenAI-compatible chat-completion client. The API key is read from the
/// environment at construction; a missing key is a ConfigError.
class HttpLlmProvider final : public LlmProvider {
 public:
  explicit HttpLlmProvider(HttpLlmSettings settings);
  std::string id() const override { return "http:" + settings_.base_url; }
  std::string complete(const LlmRequest& request) override;

 private:
  HttpLlmSettings settings_;
  std::string api_key_;
};

}  // namespace metaphor
