#include "metaphor/word_metaphor.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include <json.hpp>

#include "metaphor/errors.hpp"
#include "metaphor/rate_limit.hpp"
#include "metaphor/text.hpp"

namespace metaphor {
namespace {

using nlohmann::json;

// Collects the top-level key/value pairs of one object, in document order,
// keeping the first value of a repeated key.
class FlatObjectSax : public nlohmann::json_sax<json> {
 public:
  std::vector<std::pair<std::string, std::optional<std::string>>> pairs;

  bool null() override { return scalar(std::nullopt); }
  bool boolean(bool) override { return scalar(std::nullopt); }
  bool number_integer(number_integer_t) override { return scalar(std::nullopt); }
  bool number_unsigned(number_unsigned_t) override { return scalar(std::nullopt); }
  bool number_float(number_float_t, const string_t&) override { return scalar(std::nullopt); }
  bool string(string_t& val) override { return scalar(val); }
  bool binary(binary_t&) override { return scalar(std::nullopt); }

  bool start_object(std::size_t) override {
    if (depth_ == 0 && saw_root_) return false;
    if (depth_ == 0) saw_root_ = true;
    if (depth_ == 1) pairs.emplace_back(key_, std::nullopt);
    ++depth_;
    return true;
  }
  bool end_object() override {
    --depth_;
    return true;
  }
  bool start_array(std::size_t) override {
    if (depth_ == 0) return false;  // the root must be an object
    if (depth_ == 1) pairs.emplace_back(key_, std::nullopt);
    ++depth_;
    return true;
  }
  bool end_array() override {
    --depth_;
    return true;
  }
  bool key(string_t& val) override {
    if (depth_ == 1) key_ = val;
    return true;
  }
  bool parse_error(std::size_t, const std::string&, const nlohmann::detail::exception&) override { return false; }

 private:
  bool scalar(std::optional<std::string> v) {
    if (depth_ == 0) return false;
    if (depth_ == 1) pairs.emplace_back(key_, std::move(v));
    return true;
  }

  int depth_ = 0;
  bool saw_root_ = false;
  std::string key_;
};

// The text from the first '{' to its matching '}', honoring string literals.
std::optional<std::string_view> first_object_literal(std::string_view s) {
  const auto open = s.find('{');
  if (open == std::string_view::npos) return std::nullopt;
  int depth = 0;
  bool in_string = false;
  char quote = 0;
  for (std::size_t i = open; i < s.size(); ++i) {
    const char c = s[i];
    if (in_string) {
      if (c == '\\') {
        ++i;
      } else if (c == quote) {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
      quote = c;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return s.substr(open, i - open + 1);
    }
  }
  return std::nullopt;
}

std::optional<std::vector<std::pair<std::string, std::optional<std::string>>>> parse_flat_object(
    std::string_view raw) {
  auto literal = first_object_literal(raw);
  if (!literal) return std::nullopt;
  FlatObjectSax sax;
  const bool ok = json::sax_parse(*literal, &sax, json::input_format_t::json, true, true);
  if (!ok) return std::nullopt;
  return std::move(sax.pairs);
}

std::string cleanup(std::string_view raw) {
  std::string s(raw);
  replace_all(s, "\xE2\x80\x9C", "\"");  // left double quotation mark
  replace_all(s, "\xE2\x80\x9D", "\"");  // right double quotation mark
  replace_all(s, "\xE2\x80\x98", "'");
  replace_all(s, "\xE2\x80\x99", "'");
  // Single-quoted objects, only when the object has no double quotes at all.
  if (auto literal = first_object_literal(s); !literal || literal->find('"') == std::string_view::npos) {
    const auto open = s.find('{');
    const auto close = s.rfind('}');
    if (open != std::string::npos && close != std::string::npos && close > open) {
      for (std::size_t i = open; i < close; ++i) {
        if (s[i] == '\'') s[i] = '"';
      }
    }
  }
  // Trailing commas before a closing brace.
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == ',') {
      std::size_t j = i + 1;
      while (j < s.size() && is_ascii_space(s[j])) ++j;
      if (j < s.size() && s[j] == '}') continue;
    }
    out += s[i];
  }
  return out;
}

}  // namespace

double value_of(const ConceptScores& scores, std::string_view concept_name) {
  for (const auto& s : scores) {
    if (s.concept_name == concept_name) return s.value;
  }
  throw ArgumentError("no score for concept '" + std::string(concept_name) + "'");
}

bool ExpressionMap::insert(std::string expression, std::string concept_name) {
  if (find(expression) != nullptr) return false;
  entries_.emplace_back(std::move(expression), std::move(concept_name));
  return true;
}

const std::string* ExpressionMap::find(std::string_view expression) const {
  for (const auto& [k, v] : entries_) {
    if (k == expression) return &v;
  }
  return nullptr;
}

std::size_t ExpressionMap::count(std::string_view concept_name) const {
  return static_cast<std::size_t>(
      std::count_if(entries_.begin(), entries_.end(), [&](const Entry& e) { return e.second == concept_name; }));
}

std::string serialize(const ExpressionMap& map) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [k, v] : map.entries()) j[k] = v;
  return j.dump();
}

std::optional<ExpressionMap> parse_extraction(std::string_view raw, const ConceptRegistry& registry) {
  auto pairs = parse_flat_object(raw);
  if (!pairs) pairs = parse_flat_object(cleanup(raw));
  if (!pairs) return std::nullopt;
  ExpressionMap map;
  for (auto& [key, value] : *pairs) {
    if (trim(key).empty()) continue;
    std::string concept_name(kNoConcept);
    if (value) {
      if (auto resolved = registry.resolve(*value)) concept_name = *resolved;
    }
    map.insert(std::move(key), std::move(concept_name));
  }
  return map;
}

std::size_t count_tokens(std::string_view text) { return split_whitespace(text).size(); }

ConceptScores word_level_scores(const ExpressionMap& map, std::size_t token_count,
                                const ConceptRegistry& registry) {
  if (token_count == 0) throw ArgumentError("token count must be positive");
  const double denom = std::log(static_cast<double>(token_count) + 1.0);
  ConceptScores out;
  out.reserve(registry.size());
  for (const auto& c : registry.concepts()) {
    out.push_back({c.name, static_cast<double>(map.count(c.name)) / denom});
  }
  return out;
}

std::string_view to_string(ExtractionStatus s) {
  switch (s) {
    case ExtractionStatus::ok:
      return "ok";
    case ExtractionStatus::recovered:
      return "recovered";
    case ExtractionStatus::failed_empty:
      return "failed-empty";
    case ExtractionStatus::failed:
      return "failed";
  }
  return "failed";
}

ExtractionStatus parse_extraction_status(std::string_view s) {
  if (s == "ok") return ExtractionStatus::ok;
  if (s == "recovered") return ExtractionStatus::recovered;
  if (s == "failed-empty") return ExtractionStatus::failed_empty;
  if (s == "failed") return ExtractionStatus::failed;
  throw ArgumentError("unknown extraction status '" + std::string(s) + "'");
}

void LlmProviderConfig::validate() const {
  if (!(temperature >= 0.0)) throw ConfigError("temperature must be >= 0");
  if (max_retries < 0 || max_transport_retries < 0) throw ConfigError("retry counts must be >= 0");
}

Sleeper real_sleeper() {
  return [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

WordLevelResult extract(LlmProvider& provider, const LlmProviderConfig& config, PromptVariant variant,
                        const Document& doc, const ConceptRegistry& registry, RequestGate* gate,
                        const Sleeper& sleep) {
  config.validate();
  WordLevelResult result;
  result.doc_id = doc.id;
  result.token_count = std::max<std::size_t>(1, count_tokens(doc.text));

  const LlmRequest request{config.model, config.temperature, build_prompt(variant, doc.text), doc.id};

  auto call = [&]() -> std::optional<std::string> {
    for (int attempt = 0;; ++attempt) {
      try {
        ++result.attempts;
        if (gate) {
          auto permit = gate->enter();
          return provider.complete(request);
        }
        return provider.complete(request);
      } catch (const RateLimitError& e) {
        if (attempt >= config.max_transport_retries) {
          result.error = e.what();
          return std::nullopt;
        }
        sleep(std::max(e.retry_after(), config.backoff_base * (1 << attempt)));
      } catch (const TransportError& e) {
        if (attempt >= config.max_transport_retries) {
          result.error = e.what();
          return std::nullopt;
        }
        sleep(config.backoff_base * (1 << attempt));
      }
    }
  };

  std::optional<ExpressionMap> parsed;
  for (int parse_attempt = 0; parse_attempt <= config.max_retries; ++parse_attempt) {
    auto response = call();
    if (!response) {
      result.status = ExtractionStatus::failed;
      break;
    }
    parsed = parse_extraction(*response, registry);
    if (parsed) {
      result.status = parse_attempt == 0 ? ExtractionStatus::ok : ExtractionStatus::recovered;
      break;
    }
    result.status = ExtractionStatus::failed_empty;
  }

  if (parsed) result.expressions = std::move(*parsed);
  result.counts.reserve(registry.size());
  for (const auto& c : registry.concepts()) result.counts.push_back(result.expressions.count(c.name));
  result.scores = word_level_scores(result.expressions, result.token_count, registry);
  return result;
}

}  // namespace metaphor
