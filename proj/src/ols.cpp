#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "metaphor/analysis.hpp"
#include "metaphor/errors.hpp"

namespace metaphor {
namespace {

bool has_intercept(const Eigen::MatrixXd& X) {
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    if ((X.col(j).array() == 1.0).all()) return true;
  }
  return false;
}

double t_p_value(double t, std::size_t df) {
  if (std::isnan(t)) return 1.0;
  if (std::isinf(t)) return 0.0;
  boost::math::students_t dist(static_cast<double>(df));
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

}  // namespace

std::size_t FittedModel::index_of(std::string_view column) const {
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (columns[j] == column) return j;
  }
  throw ArgumentError("model has no column '" + std::string(column) + "'");
}

FittedModel ols_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::vector<std::string> columns,
                    const OlsOptions& options) {
  const auto n = static_cast<std::size_t>(X.rows());
  const auto p = static_cast<std::size_t>(X.cols());
  if (columns.size() != p) throw ArgumentError("column names do not match X");
  if (static_cast<std::size_t>(y.size()) != n) throw ArgumentError("X and y have different row counts");
  if (p == 0) throw ArgumentError("design has no columns");
  if (n <= p) {
    throw ArgumentError("need more rows than columns (" + std::to_string(n) + " rows, " + std::to_string(p) +
                        " columns)");
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(options.rank_tolerance);
  if (static_cast<std::size_t>(qr.rank()) < p) {
    std::string dependent;
    for (auto k = qr.rank(); k < static_cast<Eigen::Index>(p); ++k) {
      const auto j = static_cast<std::size_t>(qr.colsPermutation().indices()(k));
      dependent += (dependent.empty() ? "" : ", ") + columns[j];
    }
    throw ModelError("design is rank deficient (rank " + std::to_string(qr.rank()) + " of " + std::to_string(p) +
                     "); linearly dependent columns: " + dependent);
  }

  FittedModel m;
  m.columns = std::move(columns);
  m.n = n;
  m.df_residual = n - p;
  m.robust = options.robust;
  m.coefficients = qr.solve(y);

  const Eigen::VectorXd resid = y - X * m.coefficients;
  const double ssr = resid.squaredNorm();
  const double sigma2 = ssr / static_cast<double>(m.df_residual);
  m.residual_se = std::sqrt(sigma2);

  // (X'X)^-1 = P R^-1 R^-T P' for X P = Q R.
  const Eigen::MatrixXd R = qr.matrixR().topLeftCorner(p, p).template triangularView<Eigen::Upper>();
  const Eigen::MatrixXd Rinv =
      R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(p),
                                                                          static_cast<Eigen::Index>(p)));
  const Eigen::MatrixXd inner = Rinv * Rinv.transpose();
  const auto& perm = qr.colsPermutation();
  Eigen::MatrixXd xtx_inv = perm * inner * perm.transpose();
  xtx_inv = 0.5 * (xtx_inv + xtx_inv.transpose());

  if (options.robust) {
    const Eigen::MatrixXd meat = X.transpose() * resid.array().square().matrix().asDiagonal() * X;
    m.covariance = xtx_inv * meat * xtx_inv * (static_cast<double>(n) / static_cast<double>(m.df_residual));
    m.covariance = 0.5 * (m.covariance + m.covariance.transpose());
  } else {
    m.covariance = sigma2 * xtx_inv;
  }
  m.std_errors = m.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
  m.t_values.resize(static_cast<Eigen::Index>(p));
  m.p_values.resize(static_cast<Eigen::Index>(p));
  for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(p); ++j) {
    const double se = m.std_errors(j);
    const double b = m.coefficients(j);
    double t = 0.0;
    if (se > 0.0) {
      t = b / se;
    } else {
      t = b == 0.0 ? std::numeric_limits<double>::quiet_NaN() : std::copysign(HUGE_VAL, b);
    }
    m.t_values(j) = t;
    m.p_values(j) = t_p_value(t, m.df_residual);
  }

  const bool centered = has_intercept(X);
  const double tss = centered ? (y.array() - y.mean()).square().sum() : y.squaredNorm();
  if (!(tss > 0.0)) throw ModelError(centered ? "outcome is constant" : "outcome is identically zero");
  m.df_model = centered ? p - 1 : p;
  m.r_squared = std::clamp(1.0 - ssr / tss, 0.0, 1.0);
  m.adj_r_squared = 1.0 - (1.0 - m.r_squared) * static_cast<double>(centered ? n - 1 : n) /
                              static_cast<double>(m.df_residual);
  if (m.df_model == 0) {
    m.f_statistic = 0.0;
    m.f_p_value = 1.0;
  } else if (ssr == 0.0) {
    m.f_statistic = HUGE_VAL;
    m.f_p_value = 0.0;
  } else {
    m.f_statistic = ((tss - ssr) / static_cast<double>(m.df_model)) / sigma2;
    boost::math::fisher_f dist(static_cast<double>(m.df_model), static_cast<double>(m.df_residual));
    m.f_p_value = m.f_statistic <= 0.0 ? 1.0 : boost::math::cdf(boost::math::complement(dist, m.f_statistic));
  }
  return m;
}

FittedModel ols_fit(const DesignMatrix& design, const OlsOptions& options) {
  return ols_fit(design.X, design.y, design.columns, options);
}

}  // namespace metaphor
