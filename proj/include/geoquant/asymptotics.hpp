#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <set>
#include <vector>

#include "geoquant/core.hpp"
#include "geoquant/solver.hpp"

namespace geoquant {

/// Empirical covariance with divisor n, matching the plain expectation
/// operator used by the moment formulas here.
inline Matrix covariance(const PointCloud& cloud) {
  const auto& X = cloud.points();
  const Eigen::RowVectorXd mean = X.colwise().mean();
  const Matrix centered = X.rowwise() - mean;
  return centered.transpose() * centered / static_cast<double>(cloud.n());
}

/// Limit of |q(alpha u)|^2 (1 - alpha): half of (tr Sigma - u' Sigma u).
inline double first_order_limit(const PointCloud& cloud, const UnitVector& u) {
  const Matrix sigma = covariance(cloud);
  return 0.5 * (sigma.trace() - u.coords().dot(sigma * u.coords()));
}

/// Right-hand side of the third-order expansion. The projection term reads
///   E( <X,u> |X - <X,u> u|^2 );
/// the correction term is computed in both circulating forms, (2S + uu')u and
/// (2S + mm')u against (I - uu')m with m = E X. They coincide when the mean
/// is zero.
struct ThirdOrderRhs {
  double projection_term = 0.0;
  double value_uu = 0.0;    // projection_term - <(2 Sigma + u u')u, (I - u u') mean>
  double value_mean = 0.0;  // projection_term - <(2 Sigma + mean mean')u, (I - u u') mean>
};

inline ThirdOrderRhs third_order_rhs(const PointCloud& cloud, const UnitVector& u) {
  const auto& X = cloud.points();
  const Eigen::Index n = cloud.n();
  const Eigen::VectorXd uc = u.coords();

  double term1 = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd x = X.row(i).transpose();
    const double proj = x.dot(uc);
    term1 += proj * (x - proj * uc).squaredNorm();
  }
  term1 /= static_cast<double>(n);

  const Matrix sigma = covariance(cloud);
  const Eigen::VectorXd mean = X.colwise().mean().transpose();
  const Eigen::VectorXd mean_perp = mean - uc.dot(mean) * uc;  // (I - uu') mean

  ThirdOrderRhs out;
  out.projection_term = term1;
  const Eigen::VectorXd a_uu = 2.0 * (sigma * uc) + uc;  // (2 Sigma + u u') u
  const Eigen::VectorXd a_mean = 2.0 * (sigma * uc) + mean.dot(uc) * mean;
  out.value_uu = term1 - a_uu.dot(mean_perp);
  out.value_mean = term1 - a_mean.dot(mean_perp);
  return out;
}

struct ExpansionReport {
  UnitVector u;
  std::vector<double> alphas;
  std::vector<double> first_order_values;  // |q|^2 (1 - alpha)
  double first_order_limit = 0.0;
  std::vector<double> third_order_values;  // |q| (|q|^2 (1-alpha) - first_order_limit)
  double third_order_limit_rhs = 0.0;      // theorem form (uu' variant)
  double third_order_limit_rhs_mean_variant = 0.0;
  std::vector<Eigen::VectorXd> direction_gaps;  // |q| (q - |q| u - E(X - <X,u>u)) per alpha
  Eigen::VectorXd direction_limit;              // -1/2 |m|^2 u + (I - uu') Sigma u
};

/// Solves the quantile along an increasing alpha ladder (warm-started) and
/// records the first-order, third-order and direction-expansion diagnostics.
inline ExpansionReport expansion_sweep(const PointCloud& cloud, const UnitVector& u,
                                       const std::vector<double>& alphas,
                                       const SolverConfig& cfg = {}) {
  ExpansionReport rep{u, alphas, {}, 0.0, {}, 0.0, 0.0, {}, {}};
  rep.first_order_limit = first_order_limit(cloud, u);
  const auto rhs = third_order_rhs(cloud, u);
  rep.third_order_limit_rhs = rhs.value_uu;
  rep.third_order_limit_rhs_mean_variant = rhs.value_mean;

  const Eigen::VectorXd uc = u.coords();
  const Eigen::VectorXd mean = cloud.points().colwise().mean().transpose();
  const Eigen::VectorXd m_perp = mean - uc.dot(mean) * uc;
  const Matrix sigma = covariance(cloud);
  rep.direction_limit = -0.5 * m_perp.squaredNorm() * uc +
                        (sigma * uc - uc.dot(sigma * uc) * uc);

  const auto curve = quantile_norm_curve(cloud, u, alphas, cfg);
  for (const auto& pt : curve) {
    const Eigen::VectorXd& q = pt.report.q;
    const double nq = q.norm();
    rep.first_order_values.push_back(nq * nq * (1.0 - pt.alpha));
    rep.third_order_values.push_back(nq * (nq * nq * (1.0 - pt.alpha) - rep.first_order_limit));
    rep.direction_gaps.push_back(nq * (q - nq * uc - m_perp));
  }
  return rep;
}

struct RateFit {
  std::vector<double> alphas;
  std::vector<double> norms;
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// OLS fit of log |q(alpha u)| against log 1/(1-alpha); the slope is the
/// empirical growth exponent of the quantile norm.
inline RateFit rate_fit(const PointCloud& cloud, const UnitVector& u,
                        const std::vector<double>& alphas, const SolverConfig& cfg = {}) {
  if (std::set<double>(alphas.begin(), alphas.end()).size() < 3)
    throw Error(ErrorKind::BadParams, "need at least 3 distinct alphas");
  RateFit fit;
  fit.alphas = alphas;
  const auto curve = quantile_norm_curve(cloud, u, alphas, cfg);
  std::vector<double> xs, ys;
  for (const auto& pt : curve) {
    const double nq = pt.report.q.norm();
    fit.norms.push_back(nq);
    xs.push_back(std::log(1.0 / (1.0 - pt.alpha)));
    ys.push_back(std::log(nq));
  }
  const auto m = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  fit.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  fit.intercept = (sy - fit.slope * sx) / m;
  double ss_res = 0, ss_tot = 0;
  const double ybar = sy / m;
  for (size_t i = 0; i < xs.size(); ++i) {
    const double e = ys[i] - (fit.intercept + fit.slope * xs[i]);
    ss_res += e * e;
    ss_tot += (ys[i] - ybar) * (ys[i] - ybar);
  }
  fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

}  // namespace geoquant
