#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "metaphor/csv.hpp"
#include "metaphor/errors.hpp"
#include "metaphor/reports.hpp"
#include "metaphor/text.hpp"

namespace metaphor {
namespace {

std::string fmt(double v, const char* spec = "%.6g") {
  if (std::isnan(v)) return "NA";
  if (std::isinf(v)) return v > 0 ? "Inf" : "-Inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  std::string s = buf;
  return s == "-0" ? "0" : s;
}

std::string fixed(double v) { return fmt(v, "%.6f"); }

std::string control_label(const std::string& field) {
  if (field == "quote") return "quote status";
  if (field == "year_month") return "year:month";
  if (field == "chars" || field == "followers" || field == "following" || field == "statuses") return "log " + field;
  return field;
}

EffectScope parse_scope(const std::string& s) {
  if (s == "all") return EffectScope::all;
  if (s == "liberal") return EffectScope::liberal;
  if (s == "conservative") return EffectScope::conservative;
  throw ArgumentError("unknown scope '" + s + "' (expected all, liberal, conservative)");
}

}  // namespace

std::string significance_stars(double p) {
  if (p < 0.001) return "***";
  if (p < 0.01) return "**";
  if (p < 0.05) return "*";
  return "";
}

std::vector<std::string> report_term_order(const std::vector<std::string>& labels,
                                           const std::vector<std::string>& concepts) {
  std::vector<std::string> preferred{"ideology", "strength", "ideology:strength"};
  for (const auto& c : concepts) preferred.push_back(c);
  for (const auto& c : concepts) preferred.push_back(c + ":ideology");
  for (const auto& f : control_fields()) preferred.push_back(control_label(f));

  const std::set<std::string> present(labels.begin(), labels.end());
  std::vector<std::string> out;
  std::set<std::string> used;
  for (const auto& l : preferred) {
    if (present.count(l) != 0 && used.insert(l).second) out.push_back(l);
  }
  std::vector<std::string> frames;
  std::vector<std::string> rest;
  for (const auto& l : labels) {
    if (used.count(l) != 0 || l == kInterceptLabel) continue;
    if (l.starts_with("frame:")) {
      frames.push_back(l);
    } else {
      rest.push_back(l);
    }
    used.insert(l);
  }
  std::sort(frames.begin(), frames.end());
  out.insert(out.end(), frames.begin(), frames.end());
  out.insert(out.end(), rest.begin(), rest.end());
  if (present.count(std::string(kInterceptLabel)) != 0) out.emplace_back(kInterceptLabel);
  return out;
}

std::string coefficient_table_csv(const std::vector<NamedModel>& models, const std::vector<std::string>& concepts) {
  std::vector<std::string> labels;
  for (const auto& m : models) {
    for (const auto& c : m.model.columns) {
      if (std::find(labels.begin(), labels.end(), c) == labels.end()) labels.push_back(c);
    }
  }
  std::vector<std::string> header{"term"};
  for (const auto& m : models) {
    header.push_back(m.name + " estimate");
    header.push_back(m.name + " se");
    header.push_back(m.name + " stars");
  }
  std::string out = csv::row(header);
  for (const auto& term : report_term_order(labels, concepts)) {
    std::vector<std::string> cells{term};
    for (const auto& m : models) {
      const auto& cols = m.model.columns;
      auto it = std::find(cols.begin(), cols.end(), term);
      if (it == cols.end()) {
        cells.insert(cells.end(), {"", "", ""});
        continue;
      }
      const auto j = static_cast<Eigen::Index>(it - cols.begin());
      cells.push_back(fmt(m.model.coefficients(j)));
      cells.push_back(fmt(m.model.std_errors(j)));
      cells.push_back(significance_stars(m.model.p_values(j)));
    }
    out += csv::row(cells);
  }
  auto footer = [&](const std::string& name, auto value, auto stars) {
    std::vector<std::string> cells{name};
    for (const auto& m : models) {
      cells.push_back(value(m.model));
      cells.push_back("");
      cells.push_back(stars(m.model));
    }
    out += csv::row(cells);
  };
  auto none = [](const FittedModel&) { return std::string(); };
  footer("Observations", [](const FittedModel& f) { return std::to_string(f.n); }, none);
  footer("R2", [](const FittedModel& f) { return fmt(f.r_squared); }, none);
  footer("Adjusted R2", [](const FittedModel& f) { return fmt(f.adj_r_squared); }, none);
  footer("Residual SE", [](const FittedModel& f) { return fmt(f.residual_se); }, none);
  footer("F Statistic", [](const FittedModel& f) { return fmt(f.f_statistic); },
         [](const FittedModel& f) { return significance_stars(f.f_p_value); });
  out += csv::row({"Note", "*p<0.05; **p<0.01; ***p<0.001"});
  return out;
}

void apply_holm(std::vector<EffectRow>& rows, double alpha) {
  std::map<std::string, std::vector<std::size_t>> families;
  for (std::size_t i = 0; i < rows.size(); ++i) families[rows[i].family].push_back(i);
  for (const auto& [family, members] : families) {
    std::vector<double> p;
    for (auto i : members) p.push_back(rows[i].effect.p_value);
    const auto r = holm_bonferroni(p, alpha);
    for (std::size_t k = 0; k < members.size(); ++k) {
      rows[members[k]].p_holm = r.adjusted[k];
      rows[members[k]].significant = r.reject[k];
    }
  }
}

std::string effects_csv(const std::vector<EffectRow>& rows) {
  std::string out = csv::row({"family", "outcome", "concept", "variable", "scope", "estimate", "std_error", "p_value",
                              "p_holm", "significant", "percent_change", "percent_change_se"});
  for (const auto& r : rows) {
    const auto& e = r.effect;
    out += csv::row({r.family, r.outcome, r.concept_name, e.variable, std::string(to_string(e.scope)),
                     fmt(e.estimate), fmt(e.std_error), fmt(e.p_value), fmt(r.p_holm),
                     r.significant ? "true" : "false", e.percent_change ? fmt(*e.percent_change) : "NA",
                     e.percent_change_se ? fmt(*e.percent_change_se) : "NA"});
  }
  return out;
}

std::string marginal_effects_table_csv(const std::vector<EffectRow>& rows) {
  std::string out = csv::row({"Outcome", "Concept", "Marginal Effect (All)", "Percent Change (All)",
                              "Marginal Effect (Conservative)", "Percent Change (Conservative)",
                              "Marginal Effect (Liberal)", "Percent Change (Liberal)"});
  std::vector<std::pair<std::string, std::string>> keys;
  for (const auto& r : rows) {
    std::pair<std::string, std::string> k{r.outcome, r.concept_name};
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
  }
  auto cell = [](double est, std::optional<double> se) {
    return fixed(est) + " (" + (se ? fixed(*se) : std::string("NA")) + ")";
  };
  for (const auto& [outcome, concept_name] : keys) {
    std::vector<std::string> cells{outcome, concept_name};
    for (auto scope : {EffectScope::all, EffectScope::conservative, EffectScope::liberal}) {
      const EffectRow* hit = nullptr;
      for (const auto& r : rows) {
        if (r.outcome == outcome && r.concept_name == concept_name && r.effect.scope == scope) hit = &r;
      }
      if (hit == nullptr) {
        cells.insert(cells.end(), {"NA", "NA"});
        continue;
      }
      cells.push_back(cell(hit->effect.estimate, hit->effect.std_error));
      cells.push_back(hit->effect.percent_change ? cell(*hit->effect.percent_change, hit->effect.percent_change_se)
                                                 : std::string("NA"));
    }
    out += csv::row(cells);
  }
  return out;
}

nlohmann::ordered_json AnalysisConfig::to_json() const {
  nlohmann::ordered_json j;
  j["score_field"] = std::string(to_string(score_field));
  j["frames"] = frames;
  j["delta_sd"] = delta_sd;
  j["alpha"] = alpha;
  j["robust"] = robust;
  j["baseline_scope"] = std::string(to_string(baseline_scope));
  j["engagement_mode"] =
      engagement_mode == EngagementMode::average_over_rows ? "average_over_rows" : "representative_values";
  j["engagement_outcomes"] = engagement_outcomes;
  return j;
}

AnalysisConfig AnalysisConfig::from_json(const nlohmann::json& j) {
  AnalysisConfig c;
  if (j.contains("score_field")) c.score_field = parse_score_field(j.at("score_field").get<std::string>());
  if (j.contains("frames")) c.frames = j.at("frames").get<bool>();
  if (j.contains("delta_sd")) c.delta_sd = j.at("delta_sd").get<double>();
  if (j.contains("alpha")) c.alpha = j.at("alpha").get<double>();
  if (j.contains("robust")) c.robust = j.at("robust").get<bool>();
  if (j.contains("baseline_scope")) c.baseline_scope = parse_scope(j.at("baseline_scope").get<std::string>());
  if (j.contains("engagement_mode")) {
    const auto m = j.at("engagement_mode").get<std::string>();
    if (m == "average_over_rows") {
      c.engagement_mode = EngagementMode::average_over_rows;
    } else if (m == "representative_values") {
      c.engagement_mode = EngagementMode::representative_values;
    } else {
      throw ArgumentError("unknown engagement_mode '" + m + "'");
    }
  }
  if (j.contains("engagement_outcomes")) {
    c.engagement_outcomes = j.at("engagement_outcomes").get<std::vector<std::string>>();
  }
  if (!(c.delta_sd > 0.0)) throw ArgumentError("delta_sd must be positive");
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw ArgumentError("alpha must lie in (0, 1)");
  return c;
}

AnalysisReport run_analysis(const Corpus& corpus, const ScoreTable& scores, const AnalysisConfig& config) {
  AnalysisReport report;
  report.concepts = scores.concepts();
  if (report.concepts.empty()) throw ArgumentError("score table is empty");
  const auto frames = config.frames ? frame_names(corpus) : std::vector<std::string>{};
  const OlsOptions ols{config.robust};

  std::vector<std::string> outcomes = report.concepts;
  outcomes.emplace_back(kOverall);
  for (const auto& outcome : outcomes) {
    auto spec = ideology_spec(outcome, frames);
    spec.score_field = config.score_field;
    const auto design = build_design_matrix(corpus, scores, spec);
    auto model = ols_fit(design, ols);
    const double baseline = mean_prediction(model, design, scope_rows(design, config.baseline_scope));
    auto add = [&](MarginalEffect e) {
      if (baseline > 0.0) {
        e.percent_change = percent_change_score(e, baseline);
        e.percent_change_se = 100.0 * e.std_error / baseline;
      }
      report.score_effects.push_back({"score/" + e.variable + "/" + std::string(to_string(e.scope)), outcome,
                                      outcome, e, 1.0, false});
    };
    add(average_marginal_effect(model, design, std::string(kIdeology)));
    for (auto& e : group_average_marginal_effects(model, design, std::string(kStrength))) add(e);
    report.ideology_models.push_back({outcome, std::move(model), design.dropped});
  }

  for (const auto& outcome : config.engagement_outcomes) {
    auto spec = engagement_spec(outcome, report.concepts, frames);
    spec.score_field = config.score_field;
    const auto design = build_design_matrix(corpus, scores, spec);
    auto model = ols_fit(design, ols);
    for (const auto& c : report.concepts) {
      std::vector<MarginalEffect> effects{average_marginal_effect(model, design, c)};
      for (auto& e : group_average_marginal_effects(model, design, c)) effects.push_back(e);
      for (auto& e : effects) {
        const auto change =
            percent_change_engagement(model, design, c, config.delta_sd, e.scope, config.engagement_mode);
        e.percent_change = change.percent;
        e.percent_change_se = change.std_error;
        report.engagement_effects.push_back(
            {"engagement/" + outcome + "/" + std::string(to_string(e.scope)), outcome, c, e, 1.0, false});
      }
    }
    report.engagement_models.push_back({outcome, std::move(model), design.dropped});
  }
  apply_holm(report.score_effects, config.alpha);
  apply_holm(report.engagement_effects, config.alpha);
  return report;
}

std::vector<std::filesystem::path> write_analysis_reports(const AnalysisReport& report,
                                                          const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  auto put = [&](const std::string& name, const std::string& content) {
    const auto path = dir / name;
    write_file_atomic(path, content);
    written.push_back(path);
  };
  put("coefficients_ideology.csv", coefficient_table_csv(report.ideology_models, report.concepts));
  put("coefficients_engagement.csv", coefficient_table_csv(report.engagement_models, report.concepts));
  put("marginal_effects_engagement.csv", marginal_effects_table_csv(report.engagement_effects));
  std::vector<EffectRow> all = report.score_effects;
  all.insert(all.end(), report.engagement_effects.begin(), report.engagement_effects.end());
  put("effects.csv", effects_csv(all));

  nlohmann::ordered_json summary;
  summary["concepts"] = report.concepts;
  for (const auto* group : {&report.ideology_models, &report.engagement_models}) {
    const char* key = group == &report.ideology_models ? "ideology_models" : "engagement_models";
    summary[key] = nlohmann::ordered_json::array();
    for (const auto& m : *group) {
      summary[key].push_back({{"outcome", m.name},
                              {"n", m.model.n},
                              {"dropped", m.dropped},
                              {"r_squared", fmt(m.model.r_squared)},
                              {"f_statistic", fmt(m.model.f_statistic)}});
    }
  }
  put("analysis_summary.json", summary.dump(2) + "\n");
  return written;
}

}  // namespace metaphor
