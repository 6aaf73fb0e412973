#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "metaphor/corpus.hpp"
#include "metaphor/score_table.hpp"

namespace metaphor {

enum class Transform { none, ln1p, z, group_centered_z, log };

Transform parse_transform(std::string_view name);
std::string_view to_string(Transform t);

// Field vocabulary understood by build_design_matrix:
//   ideology             1 when ideal_point > 0 (conservative), 0 when < 0
//   strength             |ideal_point|
//   hashtag mention url quote reply verified      0/1 indicators
//   chars followers following statuses            counts
//   year_month           year * 12 + month of created_at
//   favorites retweets   engagement counts (outcomes)
//   frame:<name>         1 when the frame fired
//   <concept>            the document's score for that concept
//   overall              sum of the document's concept scores
inline constexpr std::string_view kIdeology = "ideology";
inline constexpr std::string_view kStrength = "strength";
inline constexpr std::string_view kOverall = "overall";

// Message, author and time controls in report order.
const std::vector<std::string>& control_fields();

// Fields without an explicit transform get: strength -> group_centered_z,
// chars/followers/following/statuses/favorites/retweets -> ln1p, else none.
Transform default_transform(std::string_view field);

struct DesignSpec {
  std::string outcome;
  std::vector<std::string> fixed_effects;
  std::vector<std::pair<std::string, std::string>> interactions;
  std::map<std::string, Transform> transforms;
  ScoreField score_field = ScoreField::combined;

  Transform transform_of(const std::string& field) const;
  // Throws ArgumentError for unknown fields (concepts lists the score fields
  // allowed), interaction members missing from fixed_effects, transform
  // targets that are neither outcome nor fixed effect, or a transform on
  // ideology.
  void validate(const std::vector<std::string>& concepts) const;

  nlohmann::ordered_json to_json() const;
  static DesignSpec from_json(const nlohmann::json& j);
};

// Score of one concept on ideology, strength, their interaction and the
// controls; frames adds the frame indicators.
DesignSpec ideology_spec(const std::string& outcome, const std::vector<std::string>& frames = {});
// ln(1+engagement) on ideology, strength, ideology:strength, every z-scored
// concept score and its interaction with ideology, and the controls.
DesignSpec engagement_spec(const std::string& outcome, const std::vector<std::string>& concepts,
                           const std::vector<std::string>& frames = {});

// Sorted union of the frame names present in the corpus.
std::vector<std::string> frame_names(const Corpus& corpus);

struct DesignMatrix {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  std::vector<std::string> columns;
  // Per column, the indices of the main-effect columns whose product it is:
  // empty for the intercept, {j} for a main effect, {a, b} for a:b.
  std::vector<std::vector<std::size_t>> factors;
  std::vector<std::string> doc_ids;
  std::string outcome;
  std::size_t dropped = 0;
  std::map<std::string, std::size_t> drop_reasons;

  std::optional<std::size_t> index_of(std::string_view column) const;
  // Throws ArgumentError naming the column when absent.
  std::size_t require(std::string_view column) const;
  std::size_t rows() const { return static_cast<std::size_t>(X.rows()); }

  // X row i with `column` set to `value` and every product column
  // recomputed from its factors.
  Eigen::VectorXd counterfactual_row(std::size_t i, std::size_t column, double value) const;

  /// Wraps a hand-built matrix. A name "a:b" whose parts are both column
  /// names becomes their product term; any other name is a main effect, and
  /// a column named "Constant" is the intercept.
  static DesignMatrix from_columns(Eigen::MatrixXd X, Eigen::VectorXd y, std::vector<std::string> columns);
};

inline constexpr std::string_view kInterceptLabel = "Constant";

/// Columns: "Constant", then fixed effects in spec order, then interactions.
/// Labels follow the regression tables: "quote status", "log chars",
/// "year:month", "<concept>:ideology". Rows missing a required field (ideal
/// point absent or exactly 0, no score row, no frame predictions) are
/// dropped and counted by reason. z and group_centered_z statistics are taken
/// over the rows that survive. Throws ModelError for zero surviving rows or
/// for columns with identical values (naming both).
DesignMatrix build_design_matrix(const Corpus& corpus, const ScoreTable& scores, const DesignSpec& spec);

struct OlsOptions {
  // HC1 heteroskedasticity-consistent covariance instead of sigma^2 (X'X)^-1.
  bool robust = false;
  // Relative pivot threshold of the rank-revealing QR.
  double rank_tolerance = 1e-10;
};

struct FittedModel {
  std::vector<std::string> columns;
  Eigen::VectorXd coefficients;
  Eigen::MatrixXd covariance;
  Eigen::VectorXd std_errors;
  Eigen::VectorXd t_values;
  Eigen::VectorXd p_values;  // two-sided, t distribution on df_residual
  double residual_se = 0.0;
  double r_squared = 0.0;
  double adj_r_squared = 0.0;
  double f_statistic = 0.0;
  double f_p_value = 1.0;
  std::size_t n = 0;
  std::size_t df_model = 0;
  std::size_t df_residual = 0;
  bool robust = false;

  std::size_t index_of(std::string_view column) const;
  double coef(std::string_view column) const { return coefficients(index_of(column)); }
  double se(std::string_view column) const { return std_errors(index_of(column)); }
  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const { return X * coefficients; }
};

/// Least squares through a column-pivoted QR. R^2 and F are centered when a
/// column of ones is present and uncentered otherwise. Throws ArgumentError
/// when n <= columns or the shapes disagree, ModelError listing the
/// dependent columns when X is rank deficient, ModelError for a constant
/// outcome under an intercept.
FittedModel ols_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::vector<std::string> columns,
                    const OlsOptions& options = {});
FittedModel ols_fit(const DesignMatrix& design, const OlsOptions& options = {});

struct MultipleTestResult {
  std::vector<double> adjusted;
  std::vector<bool> reject;
};

/// Holm step-down: the i-th smallest p (1-based) is tested against
/// alpha / (m - i + 1) until the first failure. Adjusted p-values are
/// (m - i + 1) p_(i), made non-decreasing by a running maximum and capped at
/// 1, returned in input order. Throws ArgumentError for p outside [0, 1] or
/// alpha outside (0, 1).
MultipleTestResult holm_bonferroni(std::span<const double> p, double alpha = 0.05);
MultipleTestResult bonferroni(std::span<const double> p, double alpha = 0.05);

enum class EffectScope { all, liberal, conservative };
std::string_view to_string(EffectScope s);

struct MarginalEffect {
  std::string variable;
  EffectScope scope = EffectScope::all;
  double estimate = 0.0;
  double std_error = 0.0;
  double p_value = 1.0;
  bool binary = false;
  std::size_t n = 0;
  std::optional<double> percent_change;
  std::optional<double> percent_change_se;
};

// Rows whose group column is 0 (liberal) or 1 (conservative); every row for
// `all`. Throws ArgumentError when the group column is not 0/1.
std::vector<std::size_t> scope_rows(const DesignMatrix& design, EffectScope scope,
                                    std::string_view group_column = kIdeology);

/// Mean over `rows` of the response to `variable`: the derivative
/// beta_v + sum beta_{v:w} w for a continuous variable, the counterfactual
/// difference yhat(v=1) - yhat(v=0) for a 0/1 variable (both levels must
/// occur in the design). The standard error is the delta method on the
/// coefficient covariance. Throws ArgumentError for an unknown variable or an
/// empty row set.
MarginalEffect average_marginal_effect(const FittedModel& model, const DesignMatrix& design,
                                       const std::string& variable);
MarginalEffect average_marginal_effect(const FittedModel& model, const DesignMatrix& design,
                                       const std::string& variable, const std::vector<std::size_t>& rows,
                                       EffectScope scope);
// Liberal then conservative.
std::vector<MarginalEffect> group_average_marginal_effects(const FittedModel& model, const DesignMatrix& design,
                                                           const std::string& variable,
                                                           std::string_view group_column = kIdeology);

// Mean fitted value over `rows`.
double mean_prediction(const FittedModel& model, const DesignMatrix& design, const std::vector<std::size_t>& rows);

// 100 * estimate / baseline. Throws ArgumentError unless baseline > 0.
double percent_change_score(const MarginalEffect& effect, double baseline);

enum class EngagementMode { average_over_rows, representative_values };

struct EngagementChange {
  double percent = 0.0;
  double std_error = 0.0;  // delta method
  double mean_low = 0.0;   // back-transformed prediction at -delta_sd/2
  double mean_high = 0.0;  // back-transformed prediction at +delta_sd/2
  std::size_t n = 0;
};

/// For an outcome fit on ln(1+x) and a standardized score column: predict at
/// score = -delta_sd/2 and +delta_sd/2 with everything else fixed,
/// back-transform with exp(yhat) - 1 and report 100 (high - low) / low.
/// average_over_rows averages the back-transformed predictions over the
/// scope's rows; representative_values predicts once at the scope's column
/// means. Throws ModelError when the low mean is not positive.
EngagementChange percent_change_engagement(const FittedModel& model, const DesignMatrix& design,
                                           const std::string& score_variable, double delta_sd = 4.0,
                                           EffectScope scope = EffectScope::all,
                                           EngagementMode mode = EngagementMode::average_over_rows,
                                           std::string_view group_column = kIdeology);

}  // namespace metaphor
