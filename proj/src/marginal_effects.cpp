#include <algorithm>
#include <cmath>

#include <boost/math/distributions/students_t.hpp>

#include "metaphor/analysis.hpp"
#include "metaphor/errors.hpp"
#include "metaphor/text.hpp"

namespace metaphor {
namespace {

void check_aligned(const FittedModel& model, const DesignMatrix& design) {
  if (model.columns != design.columns) throw ArgumentError("model and design have different columns");
}

// Sets one main-effect value and recomputes every product column.
Eigen::VectorXd with_value(const DesignMatrix& design, Eigen::VectorXd r, std::size_t column, double value) {
  r(static_cast<Eigen::Index>(column)) = value;
  for (std::size_t j = 0; j < design.factors.size(); ++j) {
    if (design.factors[j].size() < 2) continue;
    double p = 1.0;
    for (auto f : design.factors[j]) p *= r(static_cast<Eigen::Index>(f));
    r(static_cast<Eigen::Index>(j)) = p;
  }
  return r;
}

bool is_binary(const Eigen::VectorXd& col) {
  return ((col.array() == 0.0) || (col.array() == 1.0)).all();
}

double delta_se(const FittedModel& model, const Eigen::VectorXd& g) {
  return std::sqrt(std::max(0.0, g.dot(model.covariance * g)));
}

double p_value_for(double estimate, double se, std::size_t df) {
  if (se > 0.0) {
    boost::math::students_t dist(static_cast<double>(df));
    return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(estimate / se)));
  }
  return estimate == 0.0 ? 1.0 : 0.0;
}

}  // namespace

std::string_view to_string(EffectScope s) {
  switch (s) {
    case EffectScope::all:
      return "all";
    case EffectScope::liberal:
      return "liberal";
    case EffectScope::conservative:
      return "conservative";
  }
  return "all";
}

std::vector<std::size_t> scope_rows(const DesignMatrix& design, EffectScope scope, std::string_view group_column) {
  std::vector<std::size_t> rows;
  if (scope == EffectScope::all) {
    for (std::size_t i = 0; i < design.rows(); ++i) rows.push_back(i);
    return rows;
  }
  const auto g = static_cast<Eigen::Index>(design.require(group_column));
  if (!is_binary(design.X.col(g))) throw ArgumentError("group column '" + std::string(group_column) + "' is not 0/1");
  const double level = scope == EffectScope::conservative ? 1.0 : 0.0;
  for (std::size_t i = 0; i < design.rows(); ++i) {
    if (design.X(static_cast<Eigen::Index>(i), g) == level) rows.push_back(i);
  }
  return rows;
}

MarginalEffect average_marginal_effect(const FittedModel& model, const DesignMatrix& design,
                                       const std::string& variable, const std::vector<std::size_t>& rows,
                                       EffectScope scope) {
  check_aligned(model, design);
  const auto v = design.require(variable);
  if (design.factors[v] != std::vector<std::size_t>{v}) {
    throw ArgumentError("'" + variable + "' is not a main-effect column");
  }
  if (rows.empty()) throw ArgumentError("no rows in scope " + std::string(to_string(scope)) + " for '" + variable + "'");

  MarginalEffect e;
  e.variable = variable;
  e.scope = scope;
  e.n = rows.size();
  const auto vcol = design.X.col(static_cast<Eigen::Index>(v));
  e.binary = is_binary(vcol);
  if (e.binary && ((vcol.array() == 0.0).all() || (vcol.array() == 1.0).all())) {
    throw ArgumentError("binary variable '" + variable + "' takes only one level");
  }

  // The prediction is linear in v, so the derivative and the 0 -> 1
  // counterfactual difference share one gradient: for every column that
  // contains v, the mean product of its other factors.
  const auto p = static_cast<Eigen::Index>(design.columns.size());
  Eigen::VectorXd g = Eigen::VectorXd::Zero(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const auto& fs = design.factors[static_cast<std::size_t>(j)];
    if (std::find(fs.begin(), fs.end(), v) == fs.end()) continue;
    double sum = 0.0;
    for (auto i : rows) {
      double prod = 1.0;
      for (auto f : fs) {
        if (f != v) prod *= design.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(f));
      }
      sum += prod;
    }
    g(j) = sum / static_cast<double>(rows.size());
  }
  e.estimate = g.dot(model.coefficients);
  e.std_error = delta_se(model, g);
  e.p_value = p_value_for(e.estimate, e.std_error, model.df_residual);
  return e;
}

MarginalEffect average_marginal_effect(const FittedModel& model, const DesignMatrix& design,
                                       const std::string& variable) {
  return average_marginal_effect(model, design, variable, scope_rows(design, EffectScope::all), EffectScope::all);
}

std::vector<MarginalEffect> group_average_marginal_effects(const FittedModel& model, const DesignMatrix& design,
                                                           const std::string& variable,
                                                           std::string_view group_column) {
  std::vector<MarginalEffect> out;
  for (auto scope : {EffectScope::liberal, EffectScope::conservative}) {
    const auto rows = scope_rows(design, scope, group_column);
    if (rows.empty()) {
      throw ArgumentError("group " + std::string(to_string(scope)) + " of '" + std::string(group_column) +
                          "' is empty");
    }
    out.push_back(average_marginal_effect(model, design, variable, rows, scope));
  }
  return out;
}

double mean_prediction(const FittedModel& model, const DesignMatrix& design, const std::vector<std::size_t>& rows) {
  check_aligned(model, design);
  if (rows.empty()) throw ArgumentError("mean prediction over no rows");
  double sum = 0.0;
  for (auto i : rows) sum += design.X.row(static_cast<Eigen::Index>(i)).dot(model.coefficients);
  return sum / static_cast<double>(rows.size());
}

double percent_change_score(const MarginalEffect& effect, double baseline) {
  if (!(baseline > 0.0)) {
    throw ArgumentError("percent change needs a positive baseline, got " + format_double(baseline));
  }
  return 100.0 * effect.estimate / baseline;
}

EngagementChange percent_change_engagement(const FittedModel& model, const DesignMatrix& design,
                                           const std::string& score_variable, double delta_sd, EffectScope scope,
                                           EngagementMode mode, std::string_view group_column) {
  check_aligned(model, design);
  if (!(delta_sd > 0.0)) throw ArgumentError("delta_sd must be positive");
  const auto s = design.require(score_variable);
  const auto rows = scope_rows(design, scope, group_column);
  if (rows.empty()) throw ArgumentError("no rows in scope " + std::string(to_string(scope)));

  const auto p = static_cast<Eigen::Index>(design.columns.size());
  const double lo = -delta_sd / 2.0;
  const double hi = delta_sd / 2.0;
  double low = 0.0;
  double high = 0.0;
  Eigen::VectorXd d_low = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd d_high = Eigen::VectorXd::Zero(p);
  auto accumulate = [&](const Eigen::VectorXd& base, double weight) {
    const Eigen::VectorXd xl = with_value(design, base, s, lo);
    const Eigen::VectorXd xh = with_value(design, base, s, hi);
    const double el = std::exp(xl.dot(model.coefficients));
    const double eh = std::exp(xh.dot(model.coefficients));
    low += weight * el;
    high += weight * eh;
    d_low += weight * el * xl;
    d_high += weight * eh * xh;
  };
  if (mode == EngagementMode::average_over_rows) {
    const double w = 1.0 / static_cast<double>(rows.size());
    for (auto i : rows) accumulate(design.X.row(static_cast<Eigen::Index>(i)).transpose(), w);
  } else {
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(p);
    for (auto i : rows) mean += design.X.row(static_cast<Eigen::Index>(i)).transpose();
    mean /= static_cast<double>(rows.size());
    accumulate(with_value(design, mean, s, mean(static_cast<Eigen::Index>(s))), 1.0);
  }

  EngagementChange c;
  c.n = rows.size();
  c.mean_low = low - 1.0;
  c.mean_high = high - 1.0;
  if (!(c.mean_low > 0.0)) {
    throw ModelError("back-transformed prediction at -" + format_double(delta_sd / 2.0) + " SD of '" +
                     score_variable + "' is not positive (" + format_double(c.mean_low) + ")");
  }
  c.percent = 100.0 * (c.mean_high - c.mean_low) / c.mean_low;
  const Eigen::VectorXd g = 100.0 * (d_high * c.mean_low - c.mean_high * d_low) / (c.mean_low * c.mean_low);
  c.std_error = delta_se(model, g);
  return c;
}

}  // namespace metaphor
