#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "metaphor/analysis.hpp"

namespace metaphor {

// "***" below 0.001, "**" below 0.01, "*" below 0.05, else "".
std::string significance_stars(double p);

struct NamedModel {
  std::string name;
  FittedModel model;
  std::size_t dropped = 0;
};

/// Row order of the regression tables: ideology, strength, ideology:strength,
/// concept scores, concept:ideology terms, controls, frames, anything else,
/// Constant. Labels absent from `labels` are skipped.
std::vector<std::string> report_term_order(const std::vector<std::string>& labels,
                                           const std::vector<std::string>& concepts);

/// One row per term with "<model> estimate", "<model> se" and
/// "<model> stars" columns per model, then footer rows Observations, R2,
/// Adjusted R2, Residual SE, F Statistic and a significance note.
std::string coefficient_table_csv(const std::vector<NamedModel>& models, const std::vector<std::string>& concepts);

struct EffectRow {
  // Holm correction runs within a family.
  std::string family;
  std::string outcome;
  std::string concept_name;
  MarginalEffect effect;
  double p_holm = 1.0;
  bool significant = false;
};

void apply_holm(std::vector<EffectRow>& rows, double alpha);

// Long format: family,outcome,concept,variable,scope,estimate,std_error,
// p_value,p_holm,significant,percent_change,percent_change_se
std::string effects_csv(const std::vector<EffectRow>& rows);

/// Engagement marginal effects, one row per (outcome, concept), with
/// "estimate (se)" cells under the headings Marginal Effect (All), Percent
/// Change (All), then Conservative, then Liberal.
std::string marginal_effects_table_csv(const std::vector<EffectRow>& rows);

struct AnalysisConfig {
  ScoreField score_field = ScoreField::combined;
  // Adds the frame indicators found in the corpus as controls.
  bool frames = false;
  // Engagement contrast, in score standard deviations.
  double delta_sd = 4.0;
  double alpha = 0.05;
  bool robust = false;
  // Group whose mean prediction is the percent-change denominator for
  // score outcomes.
  EffectScope baseline_scope = EffectScope::liberal;
  EngagementMode engagement_mode = EngagementMode::average_over_rows;
  std::vector<std::string> engagement_outcomes{"favorites", "retweets"};

  nlohmann::ordered_json to_json() const;
  static AnalysisConfig from_json(const nlohmann::json& j);
};

struct AnalysisReport {
  std::vector<std::string> concepts;
  // One model per concept plus "overall".
  std::vector<NamedModel> ideology_models;
  std::vector<NamedModel> engagement_models;
  // Ideology AME and strength group AMEs per score model.
  std::vector<EffectRow> score_effects;
  // Score AME and group AMEs per engagement model.
  std::vector<EffectRow> engagement_effects;
};

/// Fits every score and engagement model and computes their marginal
/// effects with Holm-corrected p-values.
AnalysisReport run_analysis(const Corpus& corpus, const ScoreTable& scores, const AnalysisConfig& config);

/// Writes coefficients_ideology.csv, coefficients_engagement.csv,
/// marginal_effects_engagement.csv, effects.csv and analysis_summary.json.
std::vector<std::filesystem::path> write_analysis_reports(const AnalysisReport& report,
                                                          const std::filesystem::path& dir);

}  // namespace metaphor
