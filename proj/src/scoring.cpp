#include "metaphor/scoring.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <condition_variable>
#include <deque>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include "metaphor/errors.hpp"
#include "metaphor/rate_limit.hpp"
#include "metaphor/text.hpp"
#include "metaphor/timestamp.hpp"

namespace metaphor {

MetaphorScoreVector combine(const std::string& doc_id, const ConceptScores& word, const ConceptScores& discourse) {
  if (word.size() != discourse.size()) throw ArgumentError("word and discourse scores cover different concept sets");
  MetaphorScoreVector out{doc_id, {}};
  out.scores.reserve(word.size());
  for (std::size_t i = 0; i < word.size(); ++i) {
    if (word[i].concept_name != discourse[i].concept_name) {
      throw ArgumentError("concept mismatch: '" + word[i].concept_name + "' vs '" + discourse[i].concept_name + "'");
    }
    out.scores.push_back({word[i].concept_name, word[i].value, discourse[i].value, word[i].value + discourse[i].value});
  }
  return out;
}

double Standardized::z(std::string_view doc_id, std::string_view concept_name) const {
  for (const auto& r : rows) {
    if (r.doc_id == doc_id && r.concept_name == concept_name) return r.z;
  }
  throw ArgumentError("no standardized score for (" + std::string(doc_id) + ", " + std::string(concept_name) + ")");
}

Standardized standardize(const ScoreTable& table, ScoreField field) {
  Standardized out;
  for (const auto& name : table.concepts()) {
    const auto rows = table.rows_for(name);
    if (rows.size() < 2) throw ArgumentError("cannot standardize concept '" + name + "': fewer than two documents");
    double sum = 0.0;
    for (const auto* r : rows) sum += field_value(*r, field);
    const double mean = sum / static_cast<double>(rows.size());
    double ss = 0.0;
    for (const auto* r : rows) {
      const double d = field_value(*r, field) - mean;
      ss += d * d;
    }
    const double sd = std::sqrt(ss / static_cast<double>(rows.size() - 1));
    if (!(sd > 0.0)) throw ArgumentError("cannot standardize concept '" + name + "': zero variance");
    out.stats[name] = {mean, sd, rows.size()};
  }
  out.rows.reserve(table.size());
  for (const auto& r : table.rows()) {
    const auto& s = out.stats.at(r.concept_name);
    out.rows.push_back({r.doc_id, r.concept_name, (field_value(r, field) - s.mean) / s.sd});
  }
  return out;
}

void ScoringConfig::validate() const {
  llm.validate();
  if (max_concurrent == 0 || embedding_max_concurrent == 0) throw ConfigError("concurrency caps must be positive");
  if (workers == 0) throw ConfigError("worker count must be positive");
  if (!(failure_threshold >= 0.0 && failure_threshold <= 1.0)) throw ConfigError("failure threshold must lie in [0, 1]");
  if (!experimental_weighting && (word_weight != 1.0 || discourse_weight != 1.0)) {
    throw ConfigError("combination weights require experimental_weighting");
  }
  if (!(word_weight >= 0.0) || !(discourse_weight >= 0.0 && discourse_weight <= 1.0)) {
    throw ConfigError("weights must be non-negative and the discourse weight at most 1");
  }
}

nlohmann::ordered_json RunReport::to_json() const {
  nlohmann::ordered_json j;
  j["documents"] = documents;
  j["ok"] = ok;
  j["recovered"] = recovered;
  j["failed_empty"] = failed_empty;
  j["failed"] = failed;
  j["resumed"] = resumed;
  j["ignored_log_lines"] = ignored_log_lines;
  j["llm_attempts"] = llm_attempts;
  j["aborted"] = aborted;
  j["failed_documents"] = nlohmann::ordered_json::array();
  for (const auto& f : failures) j["failed_documents"].push_back({{"doc_id", f.doc_id}, {"reason", f.reason}});
  j["failed_empty_documents"] = failed_empty_ids;
  return j;
}

namespace {

struct RunKey {
  std::string llm;
  std::string model;
  std::string variant;
  std::string embedding;
  bool preprocess = false;

  bool matches(const nlohmann::ordered_json& j) const {
    return j.value("llm", "") == llm && j.value("model", "") == model && j.value("variant", "") == variant &&
           j.value("embedding", "") == embedding && j.value("preprocess", false) == preprocess;
  }
};

struct DocOutcome {
  std::size_t index = 0;
  ExtractionStatus status = ExtractionStatus::ok;
  std::size_t tokens = 0;
  ExpressionMap expressions;
  ConceptScores word;
  ConceptScores discourse;
  std::string error;
  std::size_t attempts = 0;
  bool failed = false;
};

nlohmann::ordered_json scores_json(const ConceptScores& s) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& c : s) j[c.concept_name] = c.value;
  return j;
}

std::optional<ConceptScores> scores_from_json(const nlohmann::ordered_json& j, const ConceptRegistry& registry) {
  if (!j.is_object()) return std::nullopt;
  ConceptScores out;
  for (const auto& c : registry.concepts()) {
    auto it = j.find(c.name);
    if (it == j.end() || !it->is_number()) return std::nullopt;
    out.push_back({c.name, it->get<double>()});
  }
  return out;
}

std::string log_line(const RunKey& key, const std::string& doc_id, const DocOutcome& o) {
  nlohmann::ordered_json j;
  j["doc_id"] = doc_id;
  j["llm"] = key.llm;
  j["model"] = key.model;
  j["variant"] = key.variant;
  j["embedding"] = key.embedding;
  j["preprocess"] = key.preprocess;
  j["status"] = std::string(to_string(o.status));
  j["tokens"] = o.tokens;
  j["expressions"] = nlohmann::ordered_json::parse(serialize(o.expressions));
  j["word"] = scores_json(o.word);
  j["discourse"] = scores_json(o.discourse);
  return j.dump() + "\n";
}

// Entries from the results log that match this run, by doc id. Unparseable
// lines (such as a line cut short by an interrupted write) are skipped.
std::map<std::string, DocOutcome> read_log(const std::filesystem::path& path, const RunKey& key,
                                           const ConceptRegistry& registry, std::size_t& ignored) {
  std::map<std::string, DocOutcome> out;
  if (path.empty() || !std::filesystem::exists(path)) return out;
  for (const auto& line : split(read_file(path), '\n')) {
    if (trim(line).empty()) continue;
    try {
      const auto j = nlohmann::ordered_json::parse(line);
      if (!key.matches(j)) {
        ++ignored;
        continue;
      }
      DocOutcome o;
      o.status = parse_extraction_status(j.at("status").get<std::string>());
      o.tokens = j.at("tokens").get<std::size_t>();
      auto word = scores_from_json(j.at("word"), registry);
      auto disc = scores_from_json(j.at("discourse"), registry);
      if (!word || !disc || o.status == ExtractionStatus::failed) {
        ++ignored;
        continue;
      }
      o.word = std::move(*word);
      o.discourse = std::move(*disc);
      if (auto parsed = parse_extraction(j.at("expressions").dump(), registry)) o.expressions = std::move(*parsed);
      out[j.at("doc_id").get<std::string>()] = std::move(o);
    } catch (const std::exception&) {
      ++ignored;
    }
  }
  return out;
}

}  // namespace

ScoreRun score_corpus(const std::vector<Document>& docs, LlmProvider& llm, EmbeddingProvider& embedder,
                      const ConceptRegistry& registry, const ScoringConfig& config) {
  config.validate();
  if (registry.size() == 0) throw ArgumentError("registry has no concepts");
  {
    std::set<std::string_view> ids;
    for (const auto& d : docs) {
      if (!ids.insert(d.id).second) throw ArgumentError("duplicate document id '" + d.id + "'");
    }
  }

  ScoreRun run;
  run.centroids = load_or_compute_centroids(embedder, registry, config.centroid_cache_dir);

  const RunKey key{llm.id(), config.llm.model, std::string(to_string(config.variant)), embedder.id(),
                   config.strip_urls_mentions};
  RunReport& report = run.report;
  report.documents = docs.size();

  std::map<std::string, DocOutcome> done = read_log(config.results_log, key, registry, report.ignored_log_lines);
  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (done.count(docs[i].id) != 0) {
      ++report.resumed;
    } else {
      todo.push_back(i);
    }
  }

  std::ofstream log;
  if (!config.results_log.empty() && !todo.empty()) {
    if (config.results_log.has_parent_path()) std::filesystem::create_directories(config.results_log.parent_path());
    // Terminate any partial trailing line left by an interrupted run.
    bool needs_newline = false;
    if (std::filesystem::exists(config.results_log) && std::filesystem::file_size(config.results_log) > 0) {
      const auto content = read_file(config.results_log);
      needs_newline = content.back() != '\n';
    }
    log.open(config.results_log, std::ios::app | std::ios::binary);
    if (!log) throw_io("cannot open results log", config.results_log.string());
    if (needs_newline) log << '\n';
  }

  RequestGate llm_gate(config.max_concurrent, config.per_minute_budget);
  RequestGate embed_gate(config.embedding_max_concurrent, 0);

  std::mutex mu;
  std::condition_variable cv;
  std::deque<DocOutcome> finished;
  std::exception_ptr fatal;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  const std::size_t worker_count = std::min(config.workers, todo.size());
  std::size_t running = worker_count;

  auto work = [&](std::size_t i) {
    const Document& doc = docs[i];
    DocOutcome o;
    o.index = i;
    auto word = extract(llm, config.llm, config.variant, doc, registry, &llm_gate, config.sleep);
    o.status = word.status;
    o.tokens = word.token_count;
    o.expressions = std::move(word.expressions);
    o.word = std::move(word.scores);
    o.attempts = word.attempts;
    if (word.status == ExtractionStatus::failed) {
      o.failed = true;
      o.error = "llm: " + word.error;
      return o;
    }
    for (int attempt = 0;; ++attempt) {
      try {
        auto permit = embed_gate.enter();
        o.discourse = discourse_scores(doc, embedder, run.centroids, config.strip_urls_mentions);
        break;
      } catch (const TransportError& e) {
        if (attempt >= config.llm.max_transport_retries) {
          o.failed = true;
          o.error = std::string("embedding: ") + e.what();
          break;
        }
        config.sleep(config.llm.backoff_base * (1 << attempt));
      }
    }
    return o;
  };

  std::vector<std::thread> threads;
  threads.reserve(worker_count);
  for (std::size_t t = 0; t < worker_count; ++t) {
    threads.emplace_back([&] {
      while (!stop.load()) {
        const auto k = next.fetch_add(1);
        if (k >= todo.size()) break;
        try {
          auto o = work(todo[k]);
          std::lock_guard lock(mu);
          finished.push_back(std::move(o));
        } catch (...) {
          std::lock_guard lock(mu);
          if (!fatal) fatal = std::current_exception();
          stop = true;
        }
        cv.notify_one();
      }
      std::lock_guard lock(mu);
      --running;
      cv.notify_one();
    });
  }

  // Coordinator: the only writer of the results log.
  const double max_failures = config.failure_threshold * static_cast<double>(docs.size());
  std::vector<DocOutcome> fresh;
  for (;;) {
    std::unique_lock lock(mu);
    cv.wait(lock, [&] { return !finished.empty() || running == 0; });
    if (finished.empty() && running == 0) break;
    auto o = std::move(finished.front());
    finished.pop_front();
    lock.unlock();

    report.llm_attempts += o.attempts;
    if (o.failed) {
      report.failures.push_back({docs[o.index].id, o.error});
      if (static_cast<double>(report.failures.size()) > max_failures) stop = true;
    } else if (log.is_open()) {
      log << log_line(key, docs[o.index].id, o);
      log.flush();
    }
    fresh.push_back(std::move(o));
  }
  for (auto& t : threads) t.join();
  if (fatal) std::rethrow_exception(fatal);

  for (auto& o : fresh) {
    if (!o.failed) done[docs[o.index].id] = std::move(o);
  }
  std::sort(report.failures.begin(), report.failures.end(),
            [](const FailedDocument& a, const FailedDocument& b) { return a.doc_id < b.doc_id; });
  report.failed = report.failures.size();
  std::set<std::string_view> wanted;
  for (const auto& d : docs) wanted.insert(d.id);
  for (const auto& [id, o] : done) {
    if (wanted.count(id) == 0) continue;
    switch (o.status) {
      case ExtractionStatus::ok:
        ++report.ok;
        break;
      case ExtractionStatus::recovered:
        ++report.recovered;
        break;
      case ExtractionStatus::failed_empty:
        ++report.failed_empty;
        report.failed_empty_ids.push_back(id);
        break;
      case ExtractionStatus::failed:
        break;
    }
  }

  if (static_cast<double>(report.failed) > max_failures) {
    report.aborted = true;
    throw ScoringAborted("scoring aborted: " + std::to_string(report.failed) + " of " +
                             std::to_string(docs.size()) + " documents failed (threshold " +
                             format_double(config.failure_threshold * 100.0) + "%)",
                         report);
  }

  auto& table = run.table;
  table.provenance = {key.llm, key.model, key.variant, key.embedding,
                      config.run_timestamp.value_or(format_timestamp(
                          std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now())))};
  // `done` is ordered by doc id.
  for (const auto& [id, o] : done) {
    if (wanted.count(id) == 0) continue;
    const auto v = combine(id, o.word, o.discourse);
    for (const auto& s : v.scores) {
      if (config.experimental_weighting) {
        table.add(id, s.concept_name, config.word_weight * s.word, config.discourse_weight * s.discourse);
      } else {
        table.add(id, s.concept_name, s.word, s.discourse);
      }
    }
  }
  return run;
}

}  // namespace metaphor
