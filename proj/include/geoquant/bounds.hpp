#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "geoquant/core.hpp"
#include "geoquant/depth.hpp"
#include "geoquant/directional.hpp"
#include "geoquant/solver.hpp"

namespace geoquant {

inline constexpr double kInclusionSlack = 0.01;  // slack on the |mean U_q| <= alpha test

struct UpperBoundReport {
  double alpha = 0.0;
  double k_alpha = 0.0;
  std::optional<double> ub1;
  std::optional<double> ub2;  // requires the finite-mean reading; always finite empirically
  double observed_norm = 0.0;
  bool ub1_satisfied = false;
  bool ub2_satisfied = false;
};

struct InclusionReport {
  double gamma = 0.0;
  double m_gamma = 0.0;
  double alpha = 0.0;
  double depth_threshold = 0.0;  // (1 - alpha^2) / m_gamma
  bool admissible = false;
  int n_tested = 0;
  int n_violations = 0;
  double max_norm_mean_u = 0.0;
};

struct LowerBoundReport {
  double alpha = 0.0;
  Point theta;
  double lower_bound = 0.0;
  double observed_displacement = 0.0;
  bool satisfied = false;
};

/// UB1: 2 k P(|X| <= k) / (1 - alpha - 2 P(|X| > k)) with empirical
/// probabilities; requires P(|X| > k) < (1-alpha)/2.
inline double upper_bound_ub1(const PointCloud& cloud, double alpha, double k_alpha) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw Error(ErrorKind::BadParams, "alpha must lie in [0,1)");
  const Eigen::Index n = cloud.n();
  Eigen::Index above = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    if (cloud.points().row(i).norm() > k_alpha) ++above;
  const double p_tail = static_cast<double>(above) / static_cast<double>(n);
  if (!(p_tail < 0.5 * (1.0 - alpha)))
    throw Error(ErrorKind::InvalidThreshold, "tail mass beyond k_alpha is too large");
  const double p_mass = 1.0 - p_tail;
  return 2.0 * k_alpha * p_mass / (1.0 - alpha - 2.0 * p_tail);
}

/// UB2: 2 E|X| / (1 - alpha).
inline double upper_bound_ub2(const PointCloud& cloud, double alpha) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw Error(ErrorKind::BadParams, "alpha must lie in [0,1)");
  const double mean_norm = cloud.points().rowwise().norm().mean();
  return 2.0 * mean_norm / (1.0 - alpha);
}

/// Smallest sample norm k with empirical P(|X| > k) <= (1-alpha)/2 - epsilon.
inline double auto_k_alpha(const PointCloud& cloud, double alpha, double epsilon) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw Error(ErrorKind::BadParams, "alpha must lie in [0,1)");
  if (epsilon >= 0.5 * (1.0 - alpha))
    throw Error(ErrorKind::Infeasible, "epsilon leaves no admissible tail mass");
  const double target = 0.5 * (1.0 - alpha) - epsilon;
  const Eigen::Index n = cloud.n();
  std::vector<double> norms(static_cast<size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i)
    norms[static_cast<size_t>(i)] = cloud.points().row(i).norm();
  std::sort(norms.begin(), norms.end());
  for (size_t k = 0; k < norms.size(); ++k) {
    if (k + 1 < norms.size() && norms[k + 1] == norms[k]) continue;
    const double tail = static_cast<double>(norms.size() - 1 - k) / static_cast<double>(n);
    if (tail <= target) return norms[k];
  }
  return norms.back();
}

/// Default epsilon for auto_k_alpha.
inline double default_k_epsilon(double alpha) { return 0.1 * (1.0 - alpha); }

namespace detail {

inline double max_depth_bound(Eigen::Index d, bool symmetric) {
  return symmetric ? 0.5 : 1.0 / (static_cast<double>(d) + 1.0);
}

inline constexpr int kMGammaDirs2d = 720;
inline constexpr int kMGammaDirsHighD = 2048;

inline int m_gamma_dirs(Eigen::Index d) { return d == 2 ? kMGammaDirs2d : kMGammaDirsHighD; }

}  // namespace detail

/// Tests the depth-region inclusion: estimates M_gamma, forms the threshold
/// tau = (1 - alpha^2) / M_gamma, draws probe points from D(tau) by rejection
/// sampling inside the region's bounding box (oversampling factor 10), and
/// checks |mean U_q| <= alpha + slack at each probe. When alpha is outside
/// the admissible range the report comes back with admissible = false and no
/// probes are drawn.
inline InclusionReport check_inclusion(const PointCloud& cloud, double gamma, double alpha,
                                       int n_probe, std::uint64_t seed, bool symmetric) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw Error(ErrorKind::BadParams, "alpha must lie in [0,1)");
  const auto mg = m_gamma_estimate(cloud, gamma, detail::m_gamma_dirs(cloud.d()), seed);

  InclusionReport rep;
  rep.gamma = gamma;
  rep.m_gamma = mg.m_gamma;
  rep.alpha = alpha;
  rep.depth_threshold = (1.0 - alpha * alpha) / mg.m_gamma;
  rep.admissible = rep.depth_threshold < detail::max_depth_bound(cloud.d(), symmetric);
  if (!rep.admissible) return rep;

  const auto region = depth_region_boundary(cloud, rep.depth_threshold, 64, seed ^ 0xb0bull);
  Eigen::VectorXd lo = region.boundary.front(), hi = region.boundary.front();
  for (const auto& b : region.boundary) {
    lo = lo.cwiseMin(b);
    hi = hi.cwiseMax(b);
  }

  Rng rng(seed);
  const int max_attempts = 10 * n_probe;
  for (int attempt = 0; attempt < max_attempts && rep.n_tested < n_probe; ++attempt) {
    Eigen::VectorXd p(cloud.d());
    for (Eigen::Index j = 0; j < cloud.d(); ++j)
      p[j] = lo[j] + (hi[j] - lo[j]) * rng.uniform();
    if (detail::depth_dispatch(cloud, p) < rep.depth_threshold) continue;
    double norm_mean_u;
    try {
      norm_mean_u = sign_expectation(cloud, p).norm_mean_u;
    } catch (const AtomHitError&) {
      continue;
    }
    ++rep.n_tested;
    rep.max_norm_mean_u = std::max(rep.max_norm_mean_u, norm_mean_u);
    if (norm_mean_u > alpha + kInclusionSlack) ++rep.n_violations;
  }
  return rep;
}

namespace detail {

/// Standard error of the empirical beta-quantile of the projections onto u,
/// by the symmetric order-statistic (Woodruff-style) difference.
inline double projected_quantile_se(const PointCloud& cloud, const UnitVector& u, double beta) {
  const Eigen::Index n = cloud.n();
  std::vector<double> s(static_cast<size_t>(n));
  Eigen::Map<Eigen::VectorXd>(s.data(), n) = cloud.points() * u.coords();
  std::sort(s.begin(), s.end());
  const auto k = static_cast<long>(beta * static_cast<double>(n - 1));
  const auto w = std::max<long>(1, std::lround(std::sqrt(static_cast<double>(n) * beta * (1.0 - beta))));
  const long lo = std::max<long>(0, k - w), hi = std::min<long>(n - 1, k + w);
  return 0.5 * (s[static_cast<size_t>(hi)] - s[static_cast<size_t>(lo)]);
}

}  // namespace detail

/// Checks the univariate lower bound: the displacement of q(alpha u) from the
/// Tukey median must be at least the minimal projected quantile at level
/// 1 - (1-alpha^2)/M_gamma, with slack two standard errors of that quantile.
inline LowerBoundReport lower_bound_check(const PointCloud& cloud, double gamma, double alpha,
                                          const UnitVector& u, const SolverConfig& cfg = {},
                                          std::uint64_t seed = 0x10e7ull) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw Error(ErrorKind::BadParams, "alpha must lie in [0,1)");
  const auto mg = m_gamma_estimate(cloud, gamma, detail::m_gamma_dirs(cloud.d()), seed);
  const double threshold = (1.0 - alpha * alpha) / mg.m_gamma;
  if (!(threshold < detail::max_depth_bound(cloud.d(), false)))
    throw Error(ErrorKind::NotAdmissible, "alpha is below the admissible range for this gamma");

  LowerBoundReport rep;
  rep.alpha = alpha;
  rep.theta = tukey_median(cloud);
  const double level = 1.0 - threshold;
  auto [dir, lb] =
      min_projected_quantile(cloud, level, rep.theta, detail::m_gamma_dirs(cloud.d()), seed);
  rep.lower_bound = lb;

  const SolveReport sol = solve_quantile(cloud, IndexVector(alpha, u), cfg);
  rep.observed_displacement = (sol.q - rep.theta).norm();
  const double se = detail::projected_quantile_se(cloud, dir, level);
  rep.satisfied = rep.observed_displacement >= rep.lower_bound - 2.0 * se;
  return rep;
}

}  // namespace geoquant
