#include "metaphor/sampling.hpp"

#include <algorithm>

#include "metaphor/errors.hpp"
#include "metaphor/rng.hpp"
#include "metaphor/text.hpp"

namespace metaphor {

void StratificationPlan::validate() const {
  if (k < 2) throw ArgumentError("stratified sampling needs k >= 2");
  if (n_c == 0) throw ArgumentError("sample size must be positive");
  if (n_c % k != 0) {
    throw ArgumentError("sample size " + std::to_string(n_c) + " is not divisible by k = " + std::to_string(k));
  }
}

std::vector<Stratum> build_strata(const ScoreTable& table, const std::string& concept_name, ScoreField field,
                                  std::size_t k) {
  if (k < 2) throw ArgumentError("stratified sampling needs k >= 2");
  const auto rows = table.rows_for(concept_name);
  if (rows.empty()) throw ArgumentError("concept '" + concept_name + "' is not in the heuristic score table");

  std::vector<Stratum> strata(k);
  for (std::size_t i = 0; i < k; ++i) strata[i].index = i;
  std::vector<std::pair<double, std::string>> positive;
  for (const auto* r : rows) {
    const double h = field_value(*r, field);
    if (h == 0.0) {
      strata[0].members.push_back(r->doc_id);
    } else if (h > 0.0) {
      positive.emplace_back(h, r->doc_id);
    }
  }
  std::sort(strata[0].members.begin(), strata[0].members.end());
  std::sort(positive.begin(), positive.end());

  const std::size_t m = positive.size();
  const std::size_t parts = k - 1;
  std::size_t begin = 0;
  for (std::size_t j = 1; j <= parts; ++j) {
    std::size_t end = j == parts ? m : (j * m) / parts;
    end = std::max(end, begin);
    // Pull tied scores across the cut into this (lower) stratum.
    while (end > 0 && end < m && positive[end].first == positive[end - 1].first) ++end;
    for (std::size_t i = begin; i < end; ++i) strata[j].members.push_back(positive[i].second);
    if (end > begin) {
      strata[j].min_score = positive[begin].first;
      strata[j].max_score = positive[end - 1].first;
    }
    begin = end;
  }
  return strata;
}

std::vector<std::string> SampleManifest::ids() const {
  std::vector<std::string> out;
  out.reserve(items.size());
  for (const auto& it : items) out.push_back(it.doc_id);
  return out;
}

nlohmann::ordered_json SampleManifest::to_json() const {
  nlohmann::ordered_json j;
  j["concept"] = plan.concept_name;
  j["seed"] = plan.seed;
  j["k"] = plan.k;
  j["n_c"] = plan.n_c;
  j["heuristic"] = {{"field", std::string(to_string(plan.heuristic_field))}, {"source", heuristic_source}};
  j["stratum_sizes"] = stratum_sizes;
  j["items"] = nlohmann::ordered_json::array();
  for (const auto& it : items) j["items"].push_back({{"doc_id", it.doc_id}, {"stratum", it.stratum}});
  return j;
}

SampleManifest SampleManifest::from_json(const nlohmann::json& j) {
  SampleManifest m;
  try {
    m.plan.concept_name = j.at("concept").get<std::string>();
    m.plan.seed = j.at("seed").get<std::uint64_t>();
    m.plan.k = j.at("k").get<std::size_t>();
    m.plan.n_c = j.at("n_c").get<std::size_t>();
    m.plan.heuristic_field = parse_score_field(j.at("heuristic").at("field").get<std::string>());
    m.heuristic_source = j.at("heuristic").at("source").get<std::string>();
    m.stratum_sizes = j.value("stratum_sizes", std::vector<std::size_t>{});
    for (const auto& it : j.at("items")) {
      m.items.push_back({it.at("doc_id").get<std::string>(), it.at("stratum").get<std::size_t>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed sample manifest: ") + e.what());
  }
  return m;
}

SampleManifest stratified_sample(const ScoreTable& table, const StratificationPlan& plan) {
  plan.validate();
  const auto strata = build_strata(table, plan.concept_name, plan.heuristic_field, plan.k);
  const std::size_t per = plan.n_c / plan.k;
  for (const auto& s : strata) {
    if (s.members.size() < per) {
      throw ArgumentError("stratum Q" + std::to_string(s.index) + " of concept '" + plan.concept_name + "' holds " +
                          std::to_string(s.members.size()) + " documents but " + std::to_string(per) +
                          " are needed");
    }
  }

  SampleManifest m;
  m.plan = plan;
  const auto& p = table.provenance;
  m.heuristic_source = p.llm_provider + "/" + p.model + "/" + p.prompt_variant + "/" + p.embedding_provider;
  Rng rng(plan.seed);
  for (const auto& s : strata) {
    m.stratum_sizes.push_back(s.members.size());
    for (auto idx : rng.sample_indices(s.members.size(), per)) m.items.push_back({s.members[idx], s.index});
  }
  return m;
}

void save_sample_manifest(const std::filesystem::path& path, const SampleManifest& manifest) {
  write_file_atomic(path, manifest.to_json().dump(2) + "\n");
}

SampleManifest load_sample_manifest(const std::filesystem::path& path) {
  try {
    return SampleManifest::from_json(nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace metaphor
