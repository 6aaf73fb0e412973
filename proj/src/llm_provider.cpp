#include "metaphor/llm_provider.hpp"

#include <json.hpp>

#include "metaphor/errors.hpp"
#include "metaphor/text.hpp"

namespace metaphor {

ScriptedLlmProvider::ScriptedLlmProvider(std::map<std::string, std::vector<std::string>> script)
    : script_(std::move(script)) {}

std::map<std::string, std::vector<std::string>> load_llm_script(const std::filesystem::path& path) {
  const auto content = read_file(path);
  std::map<std::string, std::vector<std::string>> script;
  std::size_t line_no = 0;
  for (const auto& raw : split(content, '\n')) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      const auto id = j.at("doc_id").get<std::string>();
      std::vector<std::string> responses;
      if (j.contains("responses")) {
        responses = j.at("responses").get<std::vector<std::string>>();
      } else {
        responses.push_back(j.at("response").get<std::string>());
      }
      if (responses.empty()) throw FormatError("empty response list");
      script[id] = std::move(responses);
    } catch (const std::exception& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return script;
}

ScriptedLlmProvider ScriptedLlmProvider::from_file(const std::filesystem::path& path) {
  return ScriptedLlmProvider(load_llm_script(path));
}

std::string ScriptedLlmProvider::complete(const LlmRequest& request) {
  std::string response;
  {
    std::lock_guard lock(mu_);
    ++total_calls_;
    const auto n = calls_[request.doc_id]++;
    auto it = script_.find(request.doc_id);
    if (it == script_.end()) throw TransportError("no scripted response for document '" + request.doc_id + "'");
    response = it->second[std::min(n, it->second.size() - 1)];
  }
  if (response == "!transport-error") throw TransportError("scripted transport error");
  if (response == "!rate-limit") throw RateLimitError("scripted rate limit", std::chrono::milliseconds(10));
  return response;
}

void ScriptedLlmProvider::set_script(const std::string& doc_id, std::vector<std::string> responses) {
  std::lock_guard lock(mu_);
  script_[doc_id] = std::move(responses);
}

std::size_t ScriptedLlmProvider::call_count() const {
  std::lock_guard lock(mu_);
  return total_calls_;
}

std::size_t ScriptedLlmProvider::call_count(const std::string& doc_id) const {
  std::lock_guard lock(mu_);
  auto it = calls_.find(doc_id);
  return it == calls_.end() ? 0 : it->second;
}

void save_llm_script(const std::filesystem::path& path,
                     const std::map<std::string, std::vector<std::string>>& script) {
  std::string out;
  for (const auto& [id, responses] : script) {
    out += nlohmann::json{{"doc_id", id}, {"responses", responses}}.dump();
    out += '\n';
  }
  write_file(path, out);
}

}  // namespace metaphor
