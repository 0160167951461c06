#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "geoquant/core.hpp"
#include "geoquant/rng.hpp"
#include "geoquant/special.hpp"

namespace geoquant {

struct ProjectedQuantile {
  UnitVector direction;
  double beta = 0.0;
  double value = 0.0;
};

/// Empirical quantile of the projections <u, x_i> under the convention
///   Q(beta) = inf { t : P(u'X > t) < 1 - beta }   (strict '>').
/// With sorted projections this is the smallest s_k with #{ s_i > s_k } < n(1-beta).
inline ProjectedQuantile projected_quantile(const PointCloud& cloud, const UnitVector& u,
                                            double beta) {
  if (!(beta >= 0.0 && beta < 1.0)) throw Error(ErrorKind::BadParams, "beta must lie in [0,1)");
  if (u.dim() != cloud.d()) throw Error(ErrorKind::DimensionMismatch, "direction/cloud mismatch");
  const Eigen::Index n = cloud.n();
  std::vector<double> s(static_cast<size_t>(n));
  Eigen::Map<Eigen::VectorXd>(s.data(), n) = cloud.points() * u.coords();
  std::sort(s.begin(), s.end());
  const double cutoff = static_cast<double>(n) * (1.0 - beta);
  for (size_t k = 0; k < s.size(); ++k) {
    if (k + 1 < s.size() && s[k + 1] == s[k]) continue;  // jump over ties
    const auto gt = static_cast<double>(s.size() - 1 - k);
    if (gt < cutoff) return {u, beta, s[k]};
  }
  return {u, beta, s.back()};
}

namespace detail {

/// Local refinement around an incumbent direction for d >= 3 sphere sets:
/// seeded Gaussian perturbations with shrinking radius. d = 2 uses a dense
/// angular grid instead and needs no refinement.
template <typename Score>
void refine_direction(Eigen::Index d, Score&& score, UnitVector& best_dir, double& best_val,
                      std::uint64_t seed) {
  Rng rng(seed);
  double radius = 0.5;
  for (int round = 0; round < 3; ++round) {
    for (int k = 0; k < 16; ++k) {
      Eigen::VectorXd v = best_dir.coords() + radius * rng.normal_vector(d);
      if (v.norm() == 0.0) continue;
      UnitVector cand(v);
      const double val = score(cand);
      if (val < best_val) {
        best_val = val;
        best_dir = cand;
      }
    }
    radius *= 0.25;
  }
}

template <typename Score>
std::pair<UnitVector, double> minimize_over_directions(Eigen::Index d, int n_dirs,
                                                       std::uint64_t seed, Score&& score) {
  const auto dirs = direction_set(d, n_dirs, seed);
  UnitVector best_dir = dirs.front();
  double best_val = score(best_dir);
  for (size_t k = 1; k < dirs.size(); ++k) {
    const double val = score(dirs[k]);
    if (val < best_val ||
        (val == best_val &&
         std::lexicographical_compare(dirs[k].coords().data(), dirs[k].coords().data() + d,
                                      best_dir.coords().data(), best_dir.coords().data() + d))) {
      best_val = val;
      best_dir = dirs[k];
    }
  }
  if (d >= 3) refine_direction(d, score, best_dir, best_val, seed ^ 0xd1f3c7a9u);
  return {best_dir, best_val};
}

}  // namespace detail

/// Minimizes |Q_{u'X}(beta) - <u, theta>| over a deterministic direction set.
inline std::pair<UnitVector, double> min_projected_quantile(const PointCloud& cloud, double beta,
                                                            const Point& theta, int n_dirs,
                                                            std::uint64_t seed) {
  if (!(beta >= 0.0 && beta < 1.0)) throw Error(ErrorKind::BadParams, "beta must lie in [0,1)");
  return detail::minimize_over_directions(
      cloud.d(), n_dirs, seed, [&](const UnitVector& u) {
        return std::fabs(projected_quantile(cloud, u, beta).value - u.coords().dot(theta));
      });
}

/// Monte Carlo estimate of the directional cap-mass constant:
///   (1 - gamma) * min_u (1/n) #{ i : <u, x_i> >= |x_i| sqrt(1 - gamma^2) }.
/// Samples at the origin are dropped (their direction is undefined); use
/// count_zero_points to report them. Throws ZeroMass when the minimizing cap
/// is empty, since the downstream bounds need a positive constant.
inline GammaConstant m_gamma_estimate(const PointCloud& cloud, double gamma, int n_dirs,
                                      std::uint64_t seed) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw Error(ErrorKind::BadParams, "gamma must lie in (0,1)");
  const auto& X = cloud.points();
  const Eigen::Index n = cloud.n();
  const double thr = std::sqrt(1.0 - gamma * gamma);

  std::vector<Eigen::VectorXd> unit;
  unit.reserve(static_cast<size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = X.row(i).norm();
    if (r == 0.0) continue;
    unit.push_back(X.row(i).transpose() / r);
  }
  if (unit.empty()) throw Error(ErrorKind::ZeroMass, "all samples at the origin");

  auto cap_mass = [&](const UnitVector& u) {
    Eigen::Index cnt = 0;
    for (const auto& w : unit)
      if (u.coords().dot(w) >= thr) ++cnt;
    return static_cast<double>(cnt) / static_cast<double>(unit.size());
  };
  auto [dir, min_mass] = detail::minimize_over_directions(cloud.d(), n_dirs, seed, cap_mass);
  (void)dir;
  if (min_mass <= 0.0)
    throw Error(ErrorKind::ZeroMass, "empty directional cap; estimate degenerate");
  return GammaConstant(gamma, (1.0 - gamma) * min_mass, GammaConstant::Method::MonteCarlo);
}

inline Eigen::Index count_zero_points(const PointCloud& cloud) {
  Eigen::Index z = 0;
  for (Eigen::Index i = 0; i < cloud.n(); ++i)
    if (cloud.points().row(i).norm() == 0.0) ++z;
  return z;
}

/// Closed form for rotationally invariant distributions:
///   M_gamma = (1 - gamma)/2 * I_{gamma^2}((d-1)/2, 1/2).
/// Depends only on the dimension, not on the radial law.
inline GammaConstant m_gamma_rotinv(Eigen::Index d, double gamma) {
  if (d < 2) throw Error(ErrorKind::BadParams, "dimension must be >= 2");
  if (!(gamma > 0.0 && gamma < 1.0)) throw Error(ErrorKind::BadParams, "gamma must lie in (0,1)");
  const double val = 0.5 * (1.0 - gamma) *
                     special::reg_inc_beta(0.5 * (static_cast<double>(d) - 1.0), 0.5,
                                           gamma * gamma);
  return GammaConstant(gamma, val, GammaConstant::Method::AnalyticRotInv);
}

}  // namespace geoquant
