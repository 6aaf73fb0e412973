#include <doctest.h>

#include <httplib.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "metaphor/embedding.hpp"
#include "metaphor/errors.hpp"
#include "metaphor/llm_provider.hpp"
#include "metaphor/rate_limit.hpp"
#include "metaphor/registry.hpp"
#include "metaphor/text.hpp"
#include "metaphor/word_metaphor.hpp"
#include "support.hpp"

using namespace metaphor;

namespace {

LlmProviderConfig fast_config(int max_retries = 1) {
  LlmProviderConfig c;
  c.max_retries = max_retries;
  c.backoff_base = std::chrono::milliseconds(1);
  return c;
}

struct SleepLog {
  std::vector<std::chrono::milliseconds> waits;
  Sleeper sleeper() {
    return [this](std::chrono::milliseconds d) { waits.push_back(d); };
  }
};

// Local stand-in for an OpenAI-compatible service.
class FakeService {
 public:
  FakeService() {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      last_auth = req.get_header_value("Authorization");
      const auto body = nlohmann::json::parse(req.body);
      last_model = body.at("model").get<std::string>();
      if (calls++ == 0 && rate_limit_first) {
        res.status = 429;
        res.set_header("Retry-After", "0.25");
        return;
      }
      const nlohmann::json reply = {{"choices", {{{"message", {{"content", R"({"flooding": "water"})"}}}}}}};
      res.set_content(reply.dump(), "application/json");
    });
    server_.Post("/v1/embeddings", [](const httplib::Request& req, httplib::Response& res) {
      const auto body = nlohmann::json::parse(req.body);
      nlohmann::json data = nlohmann::json::array();
      const auto& input = body.at("input");
      // Reverse order with explicit indices to exercise reordering.
      for (std::size_t i = input.size(); i-- > 0;) {
        const double len = static_cast<double>(input[i].get<std::string>().size());
        data.push_back({{"index", i}, {"embedding", {len, 1.0, 0.0}}});
      }
      res.set_content(nlohmann::json{{"data", data}}.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeService() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

  bool rate_limit_first = false;
  std::atomic<int> calls{0};
  std::string last_auth;
  std::string last_model;

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

}  // namespace

TEST_SUITE("llm") {
  TEST_CASE("mock flooding response scores water only") {
    ScriptedLlmProvider p(testing::Script{{"flood1", {R"({"flooding":"water"})"}}});
    const auto doc = testing::make_doc("flood1", "They are flooding in quickly now");
    const auto r = extract(p, fast_config(), PromptVariant::simple, doc, default_registry());
    CHECK(r.status == ExtractionStatus::ok);
    CHECK(r.token_count == 6);
    CHECK(value_of(r.scores, "water") == doctest::Approx(0.514).epsilon(0.01));
    for (const auto& s : r.scores) {
      if (s.concept_name != "water") CHECK(s.value == 0.0);
    }
    CHECK(r.counts[4] == 1);
  }

  TEST_CASE("empty object is ok with zero scores") {
    ScriptedLlmProvider p(testing::Script{{"d", {"{}"}}});
    const auto r = extract(p, fast_config(), PromptVariant::simple, testing::make_doc("d", "a b c"), default_registry());
    CHECK(r.status == ExtractionStatus::ok);
    for (const auto& s : r.scores) CHECK(s.value == 0.0);
  }

  TEST_CASE("garbage twice then valid is recovered") {
    ScriptedLlmProvider p(testing::Script{{"d", {"nope", "still nope", R"({"wave": "water"})"}}});
    const auto r = extract(p, fast_config(2), PromptVariant::descriptive, testing::make_doc("d", "a wave of people"),
                           default_registry());
    CHECK(r.status == ExtractionStatus::recovered);
    CHECK(r.attempts == 3);
    CHECK(value_of(r.scores, "water") == doctest::Approx(1.0 / std::log(5.0)));
  }

  TEST_CASE("unparseable after retries is failed-empty with zero counts") {
    ScriptedLlmProvider p(testing::Script{{"d", {"nope"}}});
    const auto r = extract(p, fast_config(1), PromptVariant::simple, testing::make_doc("d", "x"), default_registry());
    CHECK(r.status == ExtractionStatus::failed_empty);
    CHECK(p.call_count("d") == 2);
    for (auto c : r.counts) CHECK(c == 0);
  }

  TEST_CASE("transport failures are retried with exponential backoff") {
    ScriptedLlmProvider p(testing::Script{{"d", {"!transport-error", "!transport-error", "{}"}}});
    SleepLog log;
    auto cfg = fast_config();
    cfg.backoff_base = std::chrono::milliseconds(100);
    const auto r = extract(p, cfg, PromptVariant::simple, testing::make_doc("d", "x"), default_registry(), nullptr,
                           log.sleeper());
    CHECK(r.status == ExtractionStatus::ok);
    REQUIRE(log.waits.size() == 2);
    CHECK(log.waits[0].count() == 100);
    CHECK(log.waits[1].count() == 200);
  }

  TEST_CASE("transport failure after retries marks the document failed") {
    ScriptedLlmProvider p(testing::Script{{"d", {"!transport-error"}}});
    SleepLog log;
    auto cfg = fast_config();
    cfg.max_transport_retries = 2;
    const auto r = extract(p, cfg, PromptVariant::simple, testing::make_doc("d", "x"), default_registry(), nullptr,
                           log.sleeper());
    CHECK(r.status == ExtractionStatus::failed);
    CHECK_FALSE(r.error.empty());
    CHECK(p.call_count("d") == 3);
    for (const auto& s : r.scores) CHECK(s.value == 0.0);
  }

  TEST_CASE("unknown document is a transport failure") {
    ScriptedLlmProvider p;
    SleepLog log;
    auto cfg = fast_config();
    cfg.max_transport_retries = 0;
    const auto r = extract(p, cfg, PromptVariant::simple, testing::make_doc("ghost", "x"), default_registry(),
                           nullptr, log.sleeper());
    CHECK(r.status == ExtractionStatus::failed);
  }

  TEST_CASE("config validation") {
    LlmProviderConfig c;
    c.temperature = -0.1;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.temperature = 0;
    c.max_retries = -1;
    CHECK_THROWS_AS(c.validate(), ConfigError);
  }

  TEST_CASE("script file round-trip and exhaustion") {
    testing::TempDir dir;
    save_llm_script(dir / "s.jsonl", {{"a", {"x", "{}"}}, {"b", {"{\"wave\":\"water\"}"}}});
    auto p = ScriptedLlmProvider(load_llm_script(dir / "s.jsonl"));
    LlmRequest req{"m", 0.0, "prompt", "a"};
    CHECK(p.complete(req) == "x");
    CHECK(p.complete(req) == "{}");
    CHECK(p.complete(req) == "{}");
    CHECK(p.call_count() == 3);
    write_file(dir / "bad.jsonl", "{\"doc_id\": \"a\"}\n");
    CHECK_THROWS_AS(load_llm_script(dir / "bad.jsonl"), FormatError);
  }

  TEST_CASE("http provider without a key is a configuration error") {
    HttpLlmSettings s;
    s.api_key_env = "METAPHOR_TEST_UNSET_KEY";
    ::unsetenv("METAPHOR_TEST_UNSET_KEY");
    CHECK_THROWS_AS(HttpLlmProvider{s}, ConfigError);
    HttpEmbeddingSettings e;
    e.api_key_env = "METAPHOR_TEST_UNSET_KEY";
    CHECK_THROWS_AS(HttpEmbeddingProvider{e}, ConfigError);
  }

  TEST_CASE("http provider talks to a chat-completion endpoint") {
    FakeService svc;
    svc.rate_limit_first = true;
    ::setenv("METAPHOR_TEST_KEY", "secret", 1);
    HttpLlmSettings s;
    s.base_url = svc.url();
    s.api_key_env = "METAPHOR_TEST_KEY";
    HttpLlmProvider p(s);
    SleepLog log;
    auto cfg = fast_config();
    cfg.model = "gpt-test";
    const auto r = extract(p, cfg, PromptVariant::simple, testing::make_doc("d", "They are flooding in quickly now"),
                           default_registry(), nullptr, log.sleeper());
    CHECK(r.status == ExtractionStatus::ok);
    CHECK(value_of(r.scores, "water") > 0.5);
    REQUIRE(log.waits.size() == 1);
    CHECK(log.waits[0].count() == 250);
    CHECK(svc.last_auth == "Bearer secret");
    CHECK(svc.last_model == "gpt-test");
  }

  TEST_CASE("http embedding provider keeps input order") {
    FakeService svc;
    ::setenv("METAPHOR_TEST_KEY", "secret", 1);
    HttpEmbeddingSettings s;
    s.base_url = svc.url();
    s.api_key_env = "METAPHOR_TEST_KEY";
    s.batch_size = 2;
    HttpEmbeddingProvider p(s);
    const auto out = p.embed({"a", "bbb", "cc"});
    REQUIRE(out.size() == 3);
    CHECK(out[0][0] == 1.0);
    CHECK(out[1][0] == 3.0);
    CHECK(out[2][0] == 2.0);
  }

  TEST_CASE("http provider maps connection failures to transport errors") {
    ::setenv("METAPHOR_TEST_KEY", "secret", 1);
    HttpLlmSettings s;
    s.base_url = "http://127.0.0.1:1";
    s.api_key_env = "METAPHOR_TEST_KEY";
    s.timeout = std::chrono::seconds(2);
    HttpLlmProvider p(s);
    CHECK_THROWS_AS(p.complete({"m", 0.0, "x", "d"}), TransportError);
  }

  TEST_CASE("request gate caps concurrency") {
    RequestGate gate(2, 0);
    std::atomic<int> in_flight{0}, peak{0};
    std::vector<std::thread> threads;
    for (int i = 0; i < 8; ++i) {
      threads.emplace_back([&] {
        auto permit = gate.enter();
        const int now = ++in_flight;
        int p = peak.load();
        while (now > p && !peak.compare_exchange_weak(p, now)) {
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
        --in_flight;
      });
    }
    for (auto& t : threads) t.join();
    CHECK(peak.load() <= 2);
    CHECK(gate.peak_in_flight() <= 2);
    CHECK(gate.peak_in_flight() >= 1);
  }
}
