#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "metaphor/errors.hpp"
#include "metaphor/prompts.hpp"
#include "metaphor/registry.hpp"
#include "metaphor/rng.hpp"
#include "metaphor/text.hpp"
#include "metaphor/word_metaphor.hpp"
#include "support.hpp"

using namespace metaphor;

namespace {

ExpressionMap map_of(std::initializer_list<std::pair<const char*, const char*>> entries) {
  ExpressionMap m;
  for (const auto& [k, v] : entries) m.insert(k, v);
  return m;
}

}  // namespace

TEST_SUITE("word_metaphor") {
  TEST_CASE("prompt templates") {
    const auto simple = build_prompt(PromptVariant::simple, "x");
    CHECK(simple.rfind("For each metaphorical word in the tweet below", 0) == 0);
    const auto descriptive = build_prompt(PromptVariant::descriptive, "x");
    CHECK(descriptive.find("If no metaphors are found, return an empty JSON object.") != std::string::npos);
    CHECK(build_prompt(PromptVariant::simple, "x") == simple);
    CHECK(simple.find(kTweetSlot) == std::string::npos);
    CHECK(simple.find("x") != std::string::npos);
    CHECK_THROWS_AS(build_prompt(PromptVariant::simple, "  \n"), ArgumentError);
    CHECK(kPromptVariants.size() == 2);
  }

  TEST_CASE("bundled prompt files match the templates byte for byte") {
    for (auto v : kPromptVariants) {
      const auto file = testing::kDataDir / "prompts" / (std::string(to_string(v)) + ".txt");
      CHECK(read_file(file) == prompt_template(v));
    }
  }

  TEST_CASE("variant names") {
    CHECK(parse_prompt_variant("Descriptive") == PromptVariant::descriptive);
    CHECK_THROWS_AS(parse_prompt_variant("verbose"), ArgumentError);
  }

  TEST_CASE("parse a bare object") {
    const auto m = parse_extraction(R"({"flooding": "water"})", default_registry());
    REQUIRE(m);
    CHECK(*m == map_of({{"flooding", "water"}}));
  }

  TEST_CASE("parse an empty object") {
    const auto m = parse_extraction("{}", default_registry());
    REQUIRE(m);
    CHECK(m->empty());
  }

  TEST_CASE("parse a fenced object and canonicalize values") {
    const auto m = parse_extraction("```json\n{\"pour\":\"Water\",\"infest\":\"vermin\",\"x\":\"banana\"}\n```",
                                    default_registry());
    REQUIRE(m);
    CHECK(*m == map_of({{"pour", "water"}, {"infest", "vermin"}, {"x", "none"}}));
  }

  TEST_CASE("parse through prose, aliases and cleanup") {
    const auto& r = default_registry();
    auto m = parse_extraction("Sure! Here you go: {\"crushing\": \"Physical Pressure\"} Hope this helps.", r);
    REQUIRE(m);
    CHECK(*m->find("crushing") == "pressure");
    m = parse_extraction("{“wave”: “water”,}", r);
    REQUIRE(m);
    CHECK(*m->find("wave") == "water");
    m = parse_extraction(R"({"a": 3, "": "water", "b": "none"})", r);
    REQUIRE(m);
    CHECK(*m == map_of({{"a", "none"}, {"b", "none"}}));
    CHECK_FALSE(parse_extraction("no metaphors here", r).has_value());
    CHECK_FALSE(parse_extraction("{\"unterminated\": ", r).has_value());
  }

  TEST_CASE("duplicate keys keep the first value") {
    ExpressionMap m;
    CHECK(m.insert("wave", "water"));
    CHECK_FALSE(m.insert("wave", "war"));
    CHECK(*m.find("wave") == "water");
  }

  TEST_CASE("token counts") {
    CHECK(count_tokens("They are flooding in quickly now") == 6);
    CHECK(count_tokens("a  b\tc") == 3);
    CHECK(count_tokens("@user see https://t.co/x #tag") == 4);
    CHECK(count_tokens("") == 0);
  }

  TEST_CASE("one water expression in six tokens") {
    const auto s = word_level_scores(map_of({{"flooding", "water"}}), 6, default_registry());
    CHECK(value_of(s, "water") == doctest::Approx(1.0 / std::log(7.0)).epsilon(1e-15));
    CHECK(std::abs(value_of(s, "water") - 0.514) < 0.005);
    for (const auto& c : s) {
      if (c.concept_name != "water") CHECK(c.value == 0.0);
    }
  }

  TEST_CASE("two water expressions in forty tokens") {
    const auto s = word_level_scores(map_of({{"wave", "water"}, {"pour in", "water"}}), 40, default_registry());
    CHECK(value_of(s, "water") == doctest::Approx(0.5386).epsilon(1e-4));
  }

  TEST_CASE("empty map gives all zeros") {
    for (std::size_t n : {1, 5, 300}) {
      const auto s = word_level_scores(ExpressionMap{}, n, default_registry());
      CHECK(s.size() == 7);
      for (const auto& c : s) CHECK(c.value == 0.0);
    }
    CHECK_THROWS_AS(word_level_scores(ExpressionMap{}, 0, default_registry()), ArgumentError);
  }

  TEST_CASE("none entries count for no concept") {
    const auto s = word_level_scores(map_of({{"the", "none"}, {"flood", "water"}}), 10, default_registry());
    double total = 0;
    for (const auto& c : s) total += c.value;
    CHECK(total == doctest::Approx(1.0 / std::log(11.0)));
  }

  TEST_CASE("property: monotone in count, decreasing in length, order invariant") {
    const auto& r = default_registry();
    const auto names = r.names();
    Rng rng(23);
    for (int trial = 0; trial < 200; ++trial) {
      ExpressionMap m;
      const std::size_t n = rng.uniform_index(6);
      std::vector<std::pair<std::string, std::string>> entries;
      for (std::size_t i = 0; i < n; ++i) {
        entries.emplace_back("e" + std::to_string(trial) + "_" + std::to_string(i), names[rng.uniform_index(7)]);
      }
      for (const auto& [k, v] : entries) m.insert(k, v);
      const std::size_t tokens = 1 + rng.uniform_index(60);
      const auto base = word_level_scores(m, tokens, r);

      // score_c equals count / ln(tokens + 1)
      for (const auto& c : base) {
        const auto count = static_cast<double>(std::count_if(
            entries.begin(), entries.end(), [&](const auto& e) { return e.second == c.concept_name; }));
        CHECK(std::abs(c.value - count / std::log(static_cast<double>(tokens) + 1.0)) <= 1e-12);
      }

      const auto target = names[rng.uniform_index(7)];
      ExpressionMap more = m;
      more.insert("extra", target);
      CHECK(value_of(word_level_scores(more, tokens, r), target) > value_of(base, target));

      if (!m.empty()) {
        const auto longer = word_level_scores(m, tokens + 1, r);
        for (std::size_t i = 0; i < base.size(); ++i) {
          if (base[i].value > 0) CHECK(longer[i].value < base[i].value);
        }
      }

      auto shuffled = entries;
      rng.shuffle(shuffled);
      ExpressionMap reordered;
      for (const auto& [k, v] : shuffled) reordered.insert(k, v);
      CHECK(word_level_scores(reordered, tokens, r) == base);

      const auto reparsed = parse_extraction(serialize(m), r);
      REQUIRE(reparsed);
      CHECK(*reparsed == m);
    }
  }

  TEST_CASE("extraction status names") {
    for (auto s : {ExtractionStatus::ok, ExtractionStatus::recovered, ExtractionStatus::failed_empty,
                   ExtractionStatus::failed}) {
      CHECK(parse_extraction_status(to_string(s)) == s);
    }
  }
}
