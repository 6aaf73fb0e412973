#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include <json.hpp>

#include "metaphor/csv.hpp"
#include "metaphor/errors.hpp"
#include "metaphor/rng.hpp"
#include "metaphor/synthetic.hpp"
#include "metaphor/text.hpp"
#include "metaphor/word_metaphor.hpp"

namespace metaphor {
namespace {

const std::vector<std::string>& filler_words() {
  static const std::vector<std::string> words{
      "immigration", "policy",  "border",   "people",  "today",   "vote",     "law",      "country", "families",
      "congress",    "workers", "children", "state",   "reform",  "debate",   "news",     "new",     "bill",
      "senate",      "city",    "community", "support", "rights",  "election", "jobs",     "program", "report",
      "plan",        "week",    "million",  "local",   "court",   "judge",    "hearing",  "agency",  "office",
      "president",   "house",   "leaders",  "public",  "health",  "schools",  "america",  "nation",  "citizens"};
  return words;
}

bool is_stopword(const std::string& w) {
  static const std::set<std::string> stop{"they", "them", "are",  "is",    "there", "a",     "an",      "of",
                                          "it",   "in",   "the",  "to",    "on",    "for",   "down",    "up",
                                          "out",  "off",  "into", "under", "with",  "around", "between", "cause",
                                          "lay",  "take", "put",  "accept", "bears", "caught"};
  return stop.count(w) != 0 || w.size() < 3;
}

std::vector<std::string> content_words(const Concept& c) {
  std::vector<std::string> out;
  for (const auto& s : c.carrier_sentences) {
    const auto lowered = to_lower_ascii(s);
    for (auto view : split_whitespace(lowered)) {
      std::string w(view);
      while (!w.empty() && !std::isalnum(static_cast<unsigned char>(w.back()))) w.pop_back();
      if (!is_stopword(w) && std::find(out.begin(), out.end(), w) == out.end()) out.push_back(w);
    }
  }
  return out;
}

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& v) {
  return v[rng.uniform_index(v.size())];
}

std::int64_t lognormal_count(Rng& rng, double mu, double sigma) {
  return static_cast<std::int64_t>(std::floor(std::exp(rng.normal(mu, sigma))));
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

double SyntheticCorpus::latent_of(const std::string& doc_id, const std::string& concept_name) const {
  auto it = latent.find({doc_id, concept_name});
  return it == latent.end() ? 0.0 : it->second;
}

SyntheticCorpus generate_synthetic_corpus(const ConceptRegistry& registry, const SyntheticConfig& config) {
  if (config.documents == 0) throw ArgumentError("synthetic corpus needs at least one document");
  const auto& concepts = registry.concepts();
  std::vector<std::vector<std::string>> vocab;
  for (const auto& c : concepts) vocab.push_back(content_words(c));

  static const std::vector<std::string> frames{"economic", "security", "crime", "cultural_identity", "political",
                                               "legality", "health", "morality", "policy", "fairness"};
  Rng rng(config.seed);
  SyntheticCorpus out;
  const auto start = *parse_timestamp("2013-01-01T00:00:00Z");
  const auto span_seconds = static_cast<std::size_t>(8 * 365 * 24 * 3600);
  const int width = static_cast<int>(std::to_string(config.documents).size());

  for (std::size_t i = 0; i < config.documents; ++i) {
    Document d;
    std::string num = std::to_string(i + 1);
    d.id = "syn-" + std::string(static_cast<std::size_t>(std::max(0, width - static_cast<int>(num.size()))), '0') + num;

    const std::size_t focal = rng.uniform_index(concepts.size());
    double m = 0.0;
    if (!rng.bernoulli(config.literal_share)) m = std::pow(rng.uniform01(), 0.8);
    for (std::size_t c = 0; c < concepts.size(); ++c) out.latent[{d.id, concepts[c].name}] = c == focal ? m : 0.0;

    std::vector<std::string> words;
    const std::size_t filler = 10 + rng.uniform_index(9);
    for (std::size_t k = 0; k < filler; ++k) words.push_back(pick(rng, filler_words()));
    const long assoc = std::lround(5.0 * m + rng.normal(0.0, 0.7));
    for (long k = 0; k < assoc; ++k) {
      words.insert(words.begin() + static_cast<std::ptrdiff_t>(rng.uniform_index(words.size() + 1)),
                   pick(rng, vocab[focal]));
    }
    std::vector<std::string> expressions;
    if (m > 0.0 && rng.bernoulli(std::min(1.0, 0.3 + m))) expressions.push_back(pick(rng, vocab[focal]));
    if (!expressions.empty() && rng.bernoulli(0.5 * m * m)) {
      const auto& second = pick(rng, vocab[focal]);
      if (second != expressions.front()) expressions.push_back(second);
    }
    for (const auto& e : expressions) {
      words.insert(words.begin() + static_cast<std::ptrdiff_t>(rng.uniform_index(words.size() + 1)), e);
    }
    d.has_hashtag = rng.bernoulli(0.3);
    d.has_mention = rng.bernoulli(0.3);
    d.has_url = rng.bernoulli(0.4);
    if (d.has_hashtag) words.push_back("#immigration");
    if (d.has_mention) words.insert(words.begin(), "@user" + std::to_string(rng.uniform_index(50)));
    if (d.has_url) words.push_back("https://t.co/" + std::to_string(rng.next() % 1000000));
    d.text = join(words, " ");

    if (!rng.bernoulli(config.missing_ideal_point)) {
      double ip = rng.normal(0.0, 1.2);
      if (ip == 0.0) ip = 0.01;
      d.ideal_point = std::clamp(ip, -3.0, 3.0);
    }
    d.verified = rng.bernoulli(0.1);
    d.is_quote = rng.bernoulli(0.2);
    d.is_reply = rng.bernoulli(0.25);
    d.follower_count = lognormal_count(rng, 6.0, 2.0);
    d.following_count = lognormal_count(rng, 5.5, 1.5);
    d.status_count = lognormal_count(rng, 8.0, 1.5);
    d.created_at = start + std::chrono::seconds(rng.uniform_index(span_seconds));
    const double conservative = d.ideal_point && *d.ideal_point > 0 ? 1.0 : 0.0;
    const double base = -1.0 + 0.3 * std::log1p(static_cast<double>(d.follower_count)) + 0.7 * (d.verified ? 1 : 0) -
                        0.2 * conservative + 0.4 * m;
    d.favorite_count = lognormal_count(rng, base, 1.0);
    d.retweet_count = lognormal_count(rng, base - 0.5, 1.0);
    if (rng.bernoulli(0.9)) {
      std::set<std::string> fired;
      for (const auto& f : frames) {
        if (rng.bernoulli(0.2)) fired.insert(f);
      }
      d.frames = fired;
    }

    nlohmann::ordered_json answer = nlohmann::ordered_json::object();
    for (const auto& e : expressions) answer[e] = concepts[focal].name;
    if (rng.bernoulli(0.3)) answer[pick(rng, filler_words())] = std::string(kNoConcept);
    std::string response = answer.dump();
    if (rng.bernoulli(0.2)) response = "Here is the mapping:\n```json\n" + response + "\n```";
    std::vector<std::string> responses;
    if (rng.bernoulli(config.garbage_share)) responses.emplace_back("I cannot find any metaphors here.");
    responses.push_back(response);
    out.llm_script[d.id] = std::move(responses);
    out.documents.push_back(std::move(d));
  }
  return out;
}

SimulatedAnnotations simulate_annotations(const std::map<LatentKey, double>& latent,
                                          const std::vector<AnnotationTask>& tasks, const AnnotatorSimulation& sim) {
  if (sim.annotators_per_task == 0) throw ArgumentError("need at least one annotator per task");
  Rng rng(sim.seed);
  SimulatedAnnotations out;
  auto clock = sim.start;
  std::size_t next_annotator = 0;
  for (const auto& task : tasks) {
    for (std::size_t a = 0; a < sim.annotators_per_task; ++a) {
      AnnotatorSession s;
      s.annotator = "sim-" + std::to_string(++next_annotator);
      s.task_id = task.task_id;
      s.started_at = clock;
      for (const auto& doc : task.doc_ids) {
        clock += std::chrono::seconds(sim.seconds_per_item);
        auto it = latent.find({doc, task.concept_name});
        const double m = it == latent.end() ? 0.0 : it->second;
        const double p_yes = m == 0.0 ? sim.false_positive_rate : sigmoid(8.0 * (m - 0.45));
        Label label = rng.bernoulli(p_yes) ? Label::yes : Label::no;
        if (rng.bernoulli(sim.dont_know_rate)) label = Label::dont_know;
        out.records.push_back({s.annotator, task.task_id, doc, task.concept_name, label, clock});
        s.labels.push_back(label);
      }
      s.finished_at = clock;
      out.sessions.push_back(std::move(s));
      clock += std::chrono::seconds(60);
    }
  }
  return out;
}

std::string latent_to_csv(const std::map<LatentKey, double>& latent) {
  std::string out = csv::row({"doc_id", "concept", "latent"});
  for (const auto& [key, m] : latent) out += csv::row({key.first, key.second, format_double(m)});
  return out;
}

std::map<LatentKey, double> latent_from_csv(std::string_view content) {
  const auto rows = csv::parse(content);
  if (rows.empty()) throw FormatError("latent file is empty");
  const csv::Header h(rows.front());
  const auto di = h.require("doc_id");
  const auto ci = h.require("concept");
  const auto li = h.require("latent");
  std::map<LatentKey, double> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() == 1 && row[0].empty()) continue;
    if (row.size() <= std::max({di, ci, li})) throw FormatError("latent row " + std::to_string(r + 1) + " is short");
    out[{row[di], row[ci]}] = parse_double(row[li]);
  }
  return out;
}

void write_synthetic_corpus(const std::filesystem::path& dir, const SyntheticCorpus& corpus) {
  std::filesystem::create_directories(dir);
  save_documents_jsonl(dir / "corpus.jsonl", corpus.documents);
  save_llm_script(dir / "llm_script.jsonl", corpus.llm_script);
  write_file_atomic(dir / "latent.csv", latent_to_csv(corpus.latent));
}

}  // namespace metaphor
