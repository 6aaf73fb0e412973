#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <iostream>
#include <memory>
#include <set>
#include <thread>

#include <CLI11.hpp>

#include "metaphor/annotation.hpp"
#include "metaphor/annotation_service.hpp"
#include "metaphor/corpus.hpp"
#include "metaphor/csv.hpp"
#include "metaphor/errors.hpp"
#include "metaphor/evaluation.hpp"
#include "metaphor/registry.hpp"
#include "metaphor/sampling.hpp"
#include "metaphor/scoring.hpp"
#include "metaphor/synthetic.hpp"
#include "metaphor/text.hpp"

namespace metaphor::cli {
namespace fs = std::filesystem;

namespace {

// Run timestamp recorded by mock runs without an explicit one, so that two
// mock runs produce identical provenance.
constexpr const char* kMockRunTimestamp = "2000-01-01T00:00:00Z";

// An input produced by an earlier subcommand is missing.
class MissingInput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void require_input(const fs::path& path, const std::string& what, const std::string& how) {
  if (!fs::exists(path)) throw MissingInput("missing " + what + " at " + path.string() + "; " + how);
}

fs::path resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return {};
  fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

template <typename T>
void read_opt(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

std::uint64_t sub_seed(std::uint64_t seed, std::size_t index) { return seed + 1000003ULL * index; }

struct Context {
  RunConfig config;
  Layout layout;
  std::ostream& out;
  std::ostream& err;
};

ConceptRegistry load_registry(const RunConfig& c) {
  if (c.registry.empty()) return default_registry();
  return load_concept_registry(c.registry);
}

std::vector<std::string> selected_concepts(const RunConfig& c, const ConceptRegistry& registry) {
  if (c.concepts.empty()) return registry.names();
  std::vector<std::string> out;
  for (const auto& name : c.concepts) {
    auto r = registry.resolve(name);
    if (!r) throw ConfigError("unknown concept '" + name + "' in sampling.concepts");
    out.push_back(*r);
  }
  return out;
}

Corpus load_corpus(const RunConfig& c, std::ostream& err) {
  if (c.corpus.empty()) throw ConfigError("no corpus configured (paths.corpus or --corpus)");
  require_input(c.corpus, "corpus", "check paths.corpus or generate one with `metaphor synth corpus`");
  auto loaded = load_documents(c.corpus, document_format_for(c.corpus));
  for (const auto& r : loaded.rejections) {
    err << "warning: " << c.corpus.string() << ":" << r.line << ": " << r.reason << "\n";
  }
  return Corpus(std::move(loaded.documents));
}

ScoreTable load_scores(const Layout& layout) {
  require_input(layout.scores(), "score table", "run `metaphor score` first");
  return load_score_table(layout.scores());
}

// ---- score ----------------------------------------------------------------

int cmd_score(Context& ctx) {
  const auto& c = ctx.config;
  const auto registry = load_registry(c);
  std::unique_ptr<LlmProvider> llm;
  std::unique_ptr<EmbeddingProvider> embedder;
  LlmProviderConfig llm_config = c.llm;
  // Providers are built before any document is touched so that a missing
  // key or script fails fast.
  if (c.mock_providers) {
    if (c.llm_script.empty()) throw ConfigError("mock providers need providers.llm_script");
    require_input(c.llm_script, "mock LLM script", "check providers.llm_script");
    llm = std::make_unique<ScriptedLlmProvider>(load_llm_script(c.llm_script));
    llm_config.provider_id = "mock";
    embedder = std::make_unique<HashEmbeddingProvider>(c.embedding_dimension);
  } else {
    llm = std::make_unique<HttpLlmProvider>(c.llm_http);
    llm_config.provider_id = llm->id();
    if (c.embedding_kind == "http") {
      embedder = std::make_unique<HttpEmbeddingProvider>(c.embedding_http);
    } else if (c.embedding_kind == "hash") {
      embedder = std::make_unique<HashEmbeddingProvider>(c.embedding_dimension);
    } else {
      throw ConfigError("unknown embedding provider '" + c.embedding_kind + "' (expected hash or http)");
    }
  }
  const auto corpus = load_corpus(c, ctx.err);

  ScoringConfig sc;
  sc.llm = llm_config;
  sc.variant = c.variant;
  sc.workers = c.workers;
  sc.max_concurrent = c.max_concurrent;
  sc.per_minute_budget = c.per_minute_budget;
  sc.embedding_max_concurrent = c.embedding_max_concurrent;
  sc.failure_threshold = c.failure_threshold;
  sc.strip_urls_mentions = c.strip_urls_mentions;
  sc.results_log = ctx.layout.results_log();
  sc.centroid_cache_dir = c.cache_dir.empty() ? ctx.layout.root / "cache" : c.cache_dir;
  sc.run_timestamp = c.run_timestamp;
  if (!sc.run_timestamp && c.mock_providers) sc.run_timestamp = kMockRunTimestamp;
  sc.validate();

  fs::create_directories(ctx.layout.root);
  try {
    auto run = score_corpus(corpus.documents(), *llm, *embedder, registry, sc);
    save_score_table(ctx.layout.scores(), run.table);
    write_file_atomic(ctx.layout.run_report(), run.report.to_json().dump(2) + "\n");
    ctx.out << "scored " << run.report.documents << " documents (" << run.report.resumed << " resumed, "
            << run.report.failed << " failed) -> " << ctx.layout.scores().string() << " (" << run.table.size()
            << " rows)\n";
    return 0;
  } catch (const ScoringAborted& e) {
    write_file_atomic(ctx.layout.run_report(), e.report().to_json().dump(2) + "\n");
    throw;
  }
}

// ---- sample / tasks -------------------------------------------------------

int cmd_sample(Context& ctx) {
  const auto& c = ctx.config;
  const auto registry = load_registry(c);
  ScoreTable table;
  if (c.heuristic_scores.empty()) {
    table = load_scores(ctx.layout);
  } else {
    require_input(c.heuristic_scores, "heuristic score table", "check sampling.heuristic_scores");
    table = load_score_table(c.heuristic_scores);
  }
  const auto& p = table.provenance;
  const std::string source = p.llm_provider + "/" + p.model + "/" + p.prompt_variant + "/" + p.embedding_provider;
  const auto concepts = selected_concepts(c, registry);
  fs::create_directories(ctx.layout.samples_dir());
  for (const auto& name : concepts) {
    StratificationPlan plan;
    plan.concept_name = name;
    plan.k = c.k;
    plan.n_c = c.n_c;
    plan.seed = sub_seed(c.seed, *registry.index_of(name));
    plan.heuristic_field = c.heuristic_field;
    auto manifest = stratified_sample(table, plan);
    manifest.heuristic_source = source;
    save_sample_manifest(ctx.layout.sample(name), manifest);
    ctx.out << "sampled " << manifest.items.size() << " documents for " << name << " -> "
            << ctx.layout.sample(name).string() << "\n";
  }
  return 0;
}

int cmd_tasks(Context& ctx) {
  const auto& c = ctx.config;
  const auto registry = load_registry(c);
  std::vector<AnnotationTask> tasks;
  for (const auto& name : selected_concepts(c, registry)) {
    require_input(ctx.layout.sample(name), "sample manifest for " + name, "run `metaphor sample` first");
    const auto manifest = load_sample_manifest(ctx.layout.sample(name));
    auto t = create_tasks(manifest.ids(), name, c.task_size, sub_seed(c.seed, *registry.index_of(name)));
    tasks.insert(tasks.end(), t.begin(), t.end());
  }
  save_tasks(ctx.layout.tasks(), tasks);
  ctx.out << "wrote " << tasks.size() << " tasks -> " << ctx.layout.tasks().string() << "\n";
  return 0;
}

// ---- serve-annotation -----------------------------------------------------

std::atomic<bool> g_stop{false};
extern "C" void on_signal(int) { g_stop = true; }

int cmd_serve(Context& ctx) {
  const auto& c = ctx.config;
  require_input(ctx.layout.tasks(), "annotation tasks", "run `metaphor tasks` first");
  auto tasks = load_tasks(ctx.layout.tasks());
  const auto corpus = load_corpus(c, ctx.err);
  std::map<std::string, std::string> texts;
  for (const auto& t : tasks) {
    for (const auto& id : t.doc_ids) {
      const auto* d = corpus.find(id);
      if (d == nullptr) throw ConfigError("task " + t.task_id + " names document '" + id + "' absent from the corpus");
      texts[id] = d->text;
    }
  }
  AnnotationStoreOptions opts;
  opts.target_annotators = c.target_annotators;
  opts.journal = ctx.layout.journal();
  AnnotationStore store(std::move(tasks), std::move(texts), opts);
  AnnotationServer server(store);

  g_stop = false;
  auto previous_int = std::signal(SIGINT, on_signal);
  auto previous_term = std::signal(SIGTERM, on_signal);
  const int port = server.start(c.host, c.port);
  ctx.out << "annotation service listening on http://" << c.host << ":" << port << " (Ctrl-C to stop)" << std::endl;
  while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(200));
  server.stop();
  std::signal(SIGINT, previous_int);
  std::signal(SIGTERM, previous_term);

  write_file_atomic(ctx.layout.annotations(), annotations_to_csv(store.records()));
  write_file_atomic(ctx.layout.sessions(), sessions_to_csv(store.sessions()));
  ctx.out << "exported " << store.records().size() << " judgments -> " << ctx.layout.annotations().string() << "\n";
  return 0;
}

// ---- evaluate -------------------------------------------------------------

std::string ground_truth_csv(const std::vector<GroundTruth>& truths) {
  std::string out = csv::row({"doc_id", "concept", "score", "yes", "no"});
  for (const auto& t : truths) {
    out += csv::row({t.doc_id, t.concept_name, format_double(t.score), std::to_string(t.yes), std::to_string(t.no)});
  }
  return out;
}

nlohmann::ordered_json optional_number(std::optional<double> v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

int cmd_evaluate(Context& ctx) {
  const auto& c = ctx.config;
  const auto& L = ctx.layout;
  require_input(L.tasks(), "annotation tasks", "run `metaphor tasks` first");
  const std::string export_hint =
      "run `metaphor tasks`, collect judgments with `metaphor serve-annotation` (it writes the export on "
      "shutdown; GET /export/annotations and /export/sessions serve it live) or simulate them with "
      "`metaphor synth annotate`";
  require_input(L.annotations(), "annotations export", export_hint);
  require_input(L.sessions(), "annotation sessions export", export_hint);
  const auto tasks = load_tasks(L.tasks());
  const auto records = annotations_from_csv(read_file(L.annotations()));
  const auto sessions = sessions_from_csv(read_file(L.sessions()));

  FilterOptions fo;
  fo.min_duration = std::chrono::seconds(c.min_duration_seconds);
  const auto filtered = filter_annotations_report(records, sessions, fo);
  const auto agg = aggregate_scores(filtered.records, task_items(tasks));
  std::optional<double> alpha;
  try {
    alpha = krippendorff_alpha(filtered.records);
  } catch (const UndefinedMetric& e) {
    ctx.err << "warning: agreement undefined: " << e.what() << "\n";
  }

  std::vector<EvaluationModelSpec> specs = c.evaluation_models;
  if (specs.empty()) {
    specs = {{"word", {}, ScoreField::word}, {"discourse", {}, ScoreField::discourse}, {"SUM", {}, ScoreField::combined}};
  }
  std::vector<ModelScores> models;
  std::map<std::string, ScoreTable> tables;
  for (const auto& s : specs) {
    const auto key = s.scores.string();
    if (tables.count(key) == 0) {
      if (s.scores.empty()) {
        tables[key] = load_scores(L);
      } else {
        require_input(s.scores, "score table for model " + s.name, "check evaluation.models");
        tables[key] = load_score_table(s.scores);
      }
    }
    models.push_back({s.name, join_predictions(tables.at(key), s.field, agg.truths)});
  }

  const auto thresholds = c.thresholds.empty() ? default_thresholds() : c.thresholds;
  const auto sweep = threshold_sweep(models, thresholds);
  const auto spearman = spearman_table(models);

  nlohmann::ordered_json summary;
  summary["records"] = records.size();
  summary["valid_records"] = filtered.records.size();
  summary["removed"] = {{"dont_know", filtered.dont_know},
                        {"too_fast", filtered.too_fast},
                        {"same_label", filtered.same_label},
                        {"no_session", filtered.no_session}};
  summary["ground_truth_pairs"] = agg.truths.size();
  summary["coverage_gaps"] = agg.coverage_gaps.size();
  summary["krippendorff_alpha"] = optional_number(alpha);
  summary["primary_threshold"] = c.primary_threshold;

  const auto find_model = [&](const std::string& name) -> const ModelScores* {
    for (const auto& m : models) {
      if (m.name == name) return &m;
    }
    return nullptr;
  };
  const auto* a = find_model(c.comparison.first);
  const auto* b = find_model(c.comparison.second);
  if (a != nullptr && b != nullptr) {
    nlohmann::ordered_json cmp;
    cmp["model_a"] = a->name;
    cmp["model_b"] = b->name;
    try {
      const auto boot = bootstrap_auc_diff(a->rows, b->rows, c.primary_threshold, c.bootstrap_resamples, c.seed);
      cmp["auc_difference"] = boot.observed_diff;
      cmp["ci_low"] = boot.ci_low;
      cmp["ci_high"] = boot.ci_high;
      cmp["significant"] = boot.significant;
      cmp["resamples"] = boot.resamples;
      cmp["redraws"] = boot.redraws;
    } catch (const UndefinedMetric& e) {
      cmp["bootstrap_error"] = e.what();
    }
    std::optional<double> ra;
    std::optional<double> rb;
    std::size_t na = 0;
    std::size_t nb = 0;
    for (const auto& cell : spearman) {
      if (!cell.concept_name.empty()) continue;
      if (cell.model == a->name) {
        ra = cell.rho;
        na = cell.n;
      }
      if (cell.model == b->name) {
        rb = cell.rho;
        nb = cell.n;
      }
    }
    if (ra && rb && std::abs(*ra) < 1.0 && std::abs(*rb) < 1.0 && na > 3 && nb > 3) {
      const auto f = fisher_r_to_z_test(*ra, na, *rb, nb);
      cmp["fisher_z"] = f.statistic;
      cmp["fisher_p"] = f.p_value;
    } else {
      cmp["fisher_z"] = nullptr;
      cmp["fisher_p"] = nullptr;
    }
    summary["comparison"] = cmp;
  }

  const auto dir = L.evaluation_dir();
  fs::create_directories(dir);
  write_file_atomic(dir / "ground_truth.csv", ground_truth_csv(agg.truths));
  write_file_atomic(dir / "auc_grid.csv", sweep_grid_csv(sweep));
  write_file_atomic(dir / "auc_per_concept.csv", per_concept_csv(sweep, c.primary_threshold));
  write_file_atomic(dir / "auc_plot_data.csv", plot_data_csv(sweep));
  write_file_atomic(dir / "spearman.csv", spearman_csv(spearman));
  write_file_atomic(dir / "evaluation.json", summary.dump(2) + "\n");
  ctx.out << "evaluated " << models.size() << " models on " << agg.truths.size() << " ground-truth pairs -> "
          << dir.string() << "\n";
  return 0;
}

// ---- analyze / report -----------------------------------------------------

int cmd_analyze(Context& ctx) {
  const auto table = load_scores(ctx.layout);
  const auto corpus = load_corpus(ctx.config, ctx.err);
  const auto report = run_analysis(corpus, table, ctx.config.analysis);
  const auto written = write_analysis_reports(report, ctx.layout.analysis_dir());
  ctx.out << "fitted " << report.ideology_models.size() + report.engagement_models.size() << " models -> "
          << ctx.layout.analysis_dir().string() << " (" << written.size() << " files)\n";
  return 0;
}

void append_csv_table(std::string& md, const fs::path& path) {
  const auto rows = csv::parse(read_file(path));
  bool header = true;
  for (const auto& r : rows) {
    if (r.size() == 1 && r[0].empty()) continue;
    md += "| " + join(r, " | ") + " |\n";
    if (header) {
      std::string sep = "|";
      for (std::size_t i = 0; i < r.size(); ++i) sep += " --- |";
      md += sep + "\n";
      header = false;
    }
  }
  md += "\n";
}

int cmd_report(Context& ctx) {
  const auto& L = ctx.layout;
  require_input(L.scores(), "score table", "run `metaphor score` first");
  std::string md = "# Metaphor measurement report\n\n";
  auto section = [&](const std::string& title, const fs::path& path, const std::string& producer, bool table) {
    md += "## " + title + "\n\n";
    if (!fs::exists(path)) {
      md += "Not produced yet (run `metaphor " + producer + "`).\n\n";
      return;
    }
    if (table) {
      append_csv_table(md, path);
    } else {
      md += "```json\n" + read_file(path) + "```\n\n";
    }
  };
  section("Scoring run", L.run_report(), "score", false);
  section("ROC-AUC by threshold", L.evaluation_dir() / "auc_grid.csv", "evaluate", true);
  section("ROC-AUC per concept at the primary threshold", L.evaluation_dir() / "auc_per_concept.csv", "evaluate",
          true);
  section("Spearman correlation", L.evaluation_dir() / "spearman.csv", "evaluate", true);
  section("Evaluation summary", L.evaluation_dir() / "evaluation.json", "evaluate", false);
  section("Engagement marginal effects", L.analysis_dir() / "marginal_effects_engagement.csv", "analyze", true);
  section("Analysis summary", L.analysis_dir() / "analysis_summary.json", "analyze", false);
  write_file_atomic(L.report(), md);
  ctx.out << "wrote " << L.report().string() << "\n";
  return 0;
}

// ---- synth ----------------------------------------------------------------

int cmd_synth_corpus(Context& ctx, std::size_t documents, const fs::path& dir) {
  const auto registry = load_registry(ctx.config);
  SyntheticConfig sc;
  sc.documents = documents;
  sc.seed = ctx.config.seed;
  const auto corpus = generate_synthetic_corpus(registry, sc);
  write_synthetic_corpus(dir, corpus);
  ctx.out << "wrote " << corpus.documents.size() << " synthetic documents -> " << dir.string() << "\n";
  return 0;
}

int cmd_synth_annotate(Context& ctx, const fs::path& latent, std::size_t annotators, int seconds_per_item) {
  require_input(ctx.layout.tasks(), "annotation tasks", "run `metaphor tasks` first");
  require_input(latent, "latent metaphoricity file", "generate it with `metaphor synth corpus`");
  AnnotatorSimulation sim;
  sim.annotators_per_task = annotators;
  sim.seconds_per_item = seconds_per_item;
  sim.seed = ctx.config.seed;
  sim.start = *parse_timestamp("2024-01-01T00:00:00Z");
  const auto result = simulate_annotations(latent_from_csv(read_file(latent)), load_tasks(ctx.layout.tasks()), sim);
  fs::create_directories(ctx.layout.root);
  write_file_atomic(ctx.layout.annotations(), annotations_to_csv(result.records));
  write_file_atomic(ctx.layout.sessions(), sessions_to_csv(result.sessions));
  ctx.out << "simulated " << result.records.size() << " judgments -> " << ctx.layout.annotations().string() << "\n";
  return 0;
}

}  // namespace

RunConfig RunConfig::from_json(const nlohmann::json& j, const fs::path& base) {
  RunConfig c;
  auto path_of = [&](const nlohmann::json& obj, const char* key, fs::path& out) {
    if (obj.contains(key) && !obj.at(key).is_null()) out = resolve(base, obj.at(key).get<std::string>());
  };
  read_opt(j, "seed", c.seed);
  if (j.contains("paths")) {
    const auto& p = j.at("paths");
    path_of(p, "corpus", c.corpus);
    path_of(p, "registry", c.registry);
    path_of(p, "output_dir", c.output_dir);
    path_of(p, "cache_dir", c.cache_dir);
  } else {
    c.output_dir = resolve(base, "out");
  }
  if (j.contains("providers")) {
    const auto& p = j.at("providers");
    read_opt(p, "mock", c.mock_providers);
    path_of(p, "llm_script", c.llm_script);
    if (p.contains("llm")) {
      const auto& l = p.at("llm");
      read_opt(l, "base_url", c.llm_http.base_url);
      read_opt(l, "api_key_env", c.llm_http.api_key_env);
      read_opt(l, "model", c.llm.model);
      read_opt(l, "temperature", c.llm.temperature);
      read_opt(l, "max_retries", c.llm.max_retries);
      read_opt(l, "max_transport_retries", c.llm.max_transport_retries);
      if (l.contains("timeout_seconds")) {
        c.llm.timeout = std::chrono::seconds(l.at("timeout_seconds").get<int>());
        c.llm_http.timeout = c.llm.timeout;
      }
      if (l.contains("backoff_ms")) c.llm.backoff_base = std::chrono::milliseconds(l.at("backoff_ms").get<int>());
    }
    if (p.contains("embedding")) {
      const auto& e = p.at("embedding");
      read_opt(e, "kind", c.embedding_kind);
      read_opt(e, "dimension", c.embedding_dimension);
      read_opt(e, "base_url", c.embedding_http.base_url);
      read_opt(e, "model", c.embedding_http.model);
      read_opt(e, "api_key_env", c.embedding_http.api_key_env);
      read_opt(e, "batch_size", c.embedding_http.batch_size);
    }
  }
  if (j.contains("scoring")) {
    const auto& s = j.at("scoring");
    if (s.contains("variant")) c.variant = parse_prompt_variant(s.at("variant").get<std::string>());
    read_opt(s, "workers", c.workers);
    read_opt(s, "max_concurrent", c.max_concurrent);
    read_opt(s, "per_minute_budget", c.per_minute_budget);
    read_opt(s, "embedding_max_concurrent", c.embedding_max_concurrent);
    read_opt(s, "failure_threshold", c.failure_threshold);
    read_opt(s, "strip_urls_mentions", c.strip_urls_mentions);
    if (s.contains("run_timestamp")) c.run_timestamp = s.at("run_timestamp").get<std::string>();
  }
  if (j.contains("sampling")) {
    const auto& s = j.at("sampling");
    read_opt(s, "concepts", c.concepts);
    read_opt(s, "k", c.k);
    read_opt(s, "n_c", c.n_c);
    if (s.contains("heuristic_field")) c.heuristic_field = parse_score_field(s.at("heuristic_field").get<std::string>());
    path_of(s, "heuristic_scores", c.heuristic_scores);
  }
  if (j.contains("tasks")) read_opt(j.at("tasks"), "size", c.task_size);
  if (j.contains("annotation")) {
    const auto& a = j.at("annotation");
    read_opt(a, "target_annotators", c.target_annotators);
    read_opt(a, "host", c.host);
    read_opt(a, "port", c.port);
    read_opt(a, "min_duration_seconds", c.min_duration_seconds);
  }
  if (j.contains("evaluation")) {
    const auto& e = j.at("evaluation");
    read_opt(e, "thresholds", c.thresholds);
    read_opt(e, "primary_threshold", c.primary_threshold);
    read_opt(e, "bootstrap_resamples", c.bootstrap_resamples);
    if (e.contains("models")) {
      for (const auto& m : e.at("models")) {
        EvaluationModelSpec s;
        s.name = m.at("name").get<std::string>();
        path_of(m, "scores", s.scores);
        if (m.contains("field")) s.field = parse_score_field(m.at("field").get<std::string>());
        c.evaluation_models.push_back(std::move(s));
      }
    }
    if (e.contains("compare")) {
      const auto pair = e.at("compare").get<std::vector<std::string>>();
      if (pair.size() != 2) throw ConfigError("evaluation.compare names exactly two models");
      c.comparison = {pair[0], pair[1]};
    }
  }
  if (j.contains("analysis")) c.analysis = AnalysisConfig::from_json(j.at("analysis"));
  return c;
}

RunConfig RunConfig::load(const fs::path& path) {
  if (!fs::exists(path)) throw ConfigError("config file not found: " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  try {
    return from_json(j, path.parent_path());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Metaphor measurement pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  bool mock = false;
  std::string corpus_flag;
  std::string output_flag;
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--seed", seed, "random seed (overrides the config)");
  app.add_flag("--mock-providers", mock, "use the scripted LLM and the hash embedder");
  app.add_option("--corpus", corpus_flag, "document file (jsonl or csv)");
  app.add_option("--output-dir", output_flag, "directory for all artifacts");

  auto* score = app.add_subcommand("score", "score every document against every concept");
  std::string variant_flag;
  std::optional<std::size_t> workers;
  std::string script_flag;
  score->add_option("--variant", variant_flag, "prompt variant: simple or descriptive");
  score->add_option("--workers", workers, "worker threads");
  score->add_option("--llm-script", script_flag, "mock LLM responses (jsonl)");

  auto* sample = app.add_subcommand("sample", "draw the stratified evaluation sample");
  std::vector<std::string> concept_flags;
  std::optional<std::size_t> k_flag;
  std::optional<std::size_t> nc_flag;
  sample->add_option("--concept", concept_flags, "restrict to these concepts");
  sample->add_option("-k,--strata", k_flag, "number of strata including the zero stratum");
  sample->add_option("--n-c", nc_flag, "documents per concept");

  auto* tasks = app.add_subcommand("tasks", "cut the samples into annotation tasks");
  std::optional<std::size_t> task_size;
  tasks->add_option("--concept", concept_flags, "restrict to these concepts");
  tasks->add_option("--task-size", task_size, "documents per task");

  auto* serve = app.add_subcommand("serve-annotation", "serve the annotation endpoints");
  std::optional<std::string> host;
  std::optional<int> port;
  std::optional<std::size_t> target;
  serve->add_option("--host", host, "bind address");
  serve->add_option("--port", port, "port (0 picks a free one)");
  serve->add_option("--target-annotators", target, "annotators per task");

  auto* evaluate = app.add_subcommand("evaluate", "ROC-AUC, Spearman and agreement against annotations");
  std::optional<double> threshold;
  evaluate->add_option("--threshold", threshold, "primary classification threshold");

  auto* analyze = app.add_subcommand("analyze", "regressions and marginal effects");
  bool frames = false;
  analyze->add_flag("--frames", frames, "control for frame indicators");

  auto* report = app.add_subcommand("report", "collect the artifacts into report.md");

  auto* synth = app.add_subcommand("synth", "synthetic corpora and simulated annotators");
  synth->require_subcommand(1);
  auto* synth_corpus = synth->add_subcommand("corpus", "generate a synthetic corpus with mock LLM responses");
  std::size_t documents = 400;
  std::string synth_out;
  synth_corpus->add_option("--documents", documents, "number of documents");
  synth_corpus->add_option("--out", synth_out, "output directory (default <output-dir>/synthetic)");
  auto* synth_annotate = synth->add_subcommand("annotate", "simulate annotators for the current tasks");
  std::string latent_path;
  std::size_t annotators = 8;
  synth_annotate->add_option("--latent", latent_path, "latent.csv from `synth corpus`")->required();
  synth_annotate->add_option("--annotators", annotators, "annotators per task");
  int seconds_per_item = 20;
  synth_annotate->add_option("--seconds-per-item", seconds_per_item, "simulated time per judgment");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return 2;
  }

  try {
    RunConfig config = config_path.empty() ? RunConfig{} : RunConfig::load(config_path);
    if (seed) config.seed = *seed;
    if (mock) config.mock_providers = true;
    if (!corpus_flag.empty()) config.corpus = corpus_flag;
    if (!output_flag.empty()) config.output_dir = output_flag;
    if (!variant_flag.empty()) config.variant = parse_prompt_variant(variant_flag);
    if (workers) config.workers = *workers;
    if (!script_flag.empty()) config.llm_script = script_flag;
    if (!concept_flags.empty()) config.concepts = concept_flags;
    if (k_flag) config.k = *k_flag;
    if (nc_flag) config.n_c = *nc_flag;
    if (task_size) config.task_size = *task_size;
    if (host) config.host = *host;
    if (port) config.port = *port;
    if (target) config.target_annotators = *target;
    if (threshold) config.primary_threshold = *threshold;
    if (frames) config.analysis.frames = true;

    Context ctx{config, Layout{config.output_dir}, out, err};
    if (*score) return cmd_score(ctx);
    if (*sample) return cmd_sample(ctx);
    if (*tasks) return cmd_tasks(ctx);
    if (*serve) return cmd_serve(ctx);
    if (*evaluate) return cmd_evaluate(ctx);
    if (*analyze) return cmd_analyze(ctx);
    if (*report) return cmd_report(ctx);
    if (*synth_corpus) {
      return cmd_synth_corpus(ctx, documents, synth_out.empty() ? ctx.layout.root / "synthetic" : fs::path(synth_out));
    }
    if (*synth_annotate) return cmd_synth_annotate(ctx, latent_path, annotators, seconds_per_item);
    err << "error: no subcommand\n";
    return 2;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const MissingInput& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace metaphor::cli
