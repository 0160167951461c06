#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <thread>
#include <vector>

#include "geoquant/core.hpp"
#include "geoquant/rng.hpp"

namespace geoquant {

struct DepthValue {
  double value = 0.0;
  UnitVector witness_direction;  // normal of a minimizing (or minimal found) halfspace
};

struct DepthRegion {
  double tau = 0.0;
  std::vector<Point> boundary;  // 2D: closed polyline in ray order; d>=3: ray samples
  Point center;                 // the Tukey median used as the ray origin
};

namespace detail {

inline void parallel_for(int n_items, int threads, const std::function<void(int)>& body) {
  threads = std::max(1, threads);
  if (threads == 1 || n_items < 2 * threads) {
    for (int i = 0; i < n_items; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<int> next{0};
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n_items; i = next.fetch_add(1)) body(i);
    });
  for (auto& th : pool) th.join();
}

}  // namespace detail

/// Exact bivariate halfspace depth of x: the minimum over closed halfplanes
/// with boundary through x of the fraction of sample points they contain.
///
/// Sweep formulation: with d_i = x_i - x and angles t_i = atan2(d_i), the
/// count of a closed halfplane equals m minus the count of an open halfplane
/// of the complementary normal, so
///   n * depth = zeros + m - max_i #{ j : t_j in [t_i, t_i + pi) },
/// where zeros counts samples coinciding with x (inside every closed
/// halfplane through x). O(n log n).
inline DepthValue depth_exact_2d(const PointCloud& cloud, const Point& x) {
  if (cloud.d() != 2 || x.size() != 2)
    throw Error(ErrorKind::DimensionMismatch, "exact depth requires d = 2");
  const auto& X = cloud.points();
  const Eigen::Index n = cloud.n();

  Eigen::Index zeros = 0;
  std::vector<double> theta;
  theta.reserve(static_cast<size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const double dx = X(i, 0) - x[0], dy = X(i, 1) - x[1];
    if (std::hypot(dx, dy) <= 1e-12) {
      ++zeros;
      continue;
    }
    theta.push_back(std::atan2(dy, dx));
  }
  const Eigen::Index m = static_cast<Eigen::Index>(theta.size());
  if (m == 0) {
    return {1.0, UnitVector::axis(2, 0)};
  }
  std::sort(theta.begin(), theta.end());

  std::vector<double> ext(theta);
  ext.reserve(theta.size() * 2);
  for (double t : theta) ext.push_back(t + 2.0 * std::numbers::pi);

  Eigen::Index max_open = 0;
  size_t argmax = 0;
  for (size_t i = 0; i < theta.size(); ++i) {
    const auto it = std::lower_bound(ext.begin() + static_cast<long>(i), ext.end(),
                                     theta[i] + std::numbers::pi);
    const Eigen::Index cnt = static_cast<Eigen::Index>(it - (ext.begin() + static_cast<long>(i)));
    if (cnt > max_open) {
      max_open = cnt;
      argmax = i;
    }
  }
  // The minimizing closed halfplane is the complement of the fullest open
  // halfplane; its inward normal sits at the arc start minus pi/2.
  const double phi = theta[argmax] - 0.5 * std::numbers::pi;
  DepthValue out{static_cast<double>(zeros + m - max_open) / static_cast<double>(n),
                 UnitVector::from_angle(phi)};
  return out;
}

/// Random-projection depth estimate: the minimum over n_dirs seeded uniform
/// directions v of the fraction of samples with <v, x_i - x> >= 0. An upper
/// estimate of the true depth (the minimum runs over a direction subset);
/// deterministic given the seed.
inline DepthValue depth_approx(const PointCloud& cloud, const Point& x, int n_dirs,
                               std::uint64_t seed) {
  if (n_dirs < 1) throw Error(ErrorKind::BadParams, "n_dirs must be >= 1");
  if (x.size() != cloud.d()) throw Error(ErrorKind::DimensionMismatch, "point/cloud dim mismatch");
  const auto& X = cloud.points();
  const Eigen::Index n = cloud.n(), d = cloud.d();
  Rng rng(seed);
  Eigen::Index best = n + 1;
  Eigen::VectorXd best_dir = Eigen::VectorXd::Zero(d);
  for (int k = 0; k < n_dirs; ++k) {
    Eigen::VectorXd v = rng.normal_vector(d);
    const double nv = v.norm();
    if (nv == 0.0) {
      --k;
      continue;
    }
    v /= nv;
    Eigen::Index cnt = 0;
    for (Eigen::Index i = 0; i < n; ++i)
      if (v.dot(X.row(i).transpose() - x) >= 0.0) ++cnt;
    if (cnt < best) {
      best = cnt;
      best_dir = v;
    }
  }
  return {static_cast<double>(best) / static_cast<double>(n), UnitVector(best_dir)};
}

namespace detail {

// Internal dispatch used by the median/region machinery: exact in 2D,
// seeded projection estimate otherwise.
inline double depth_dispatch(const PointCloud& cloud, const Point& x, int approx_dirs = 512,
                             std::uint64_t seed = 0x9e3779b97f4a7c15ull) {
  if (cloud.d() == 2) return depth_exact_2d(cloud, x).value;
  return depth_approx(cloud, x, approx_dirs, seed).value;
}

}  // namespace detail

/// Tukey median by coarse-to-fine grid search over the (quasiconcave) depth
/// surface: start at the deepest sample point, then repeatedly evaluate a
/// local grid around the incumbent with per-level halved span. Grid points
/// tying at the final maximum are averaged (the average stays in the convex
/// maximal-depth region, so its depth does not drop).
inline Point tukey_median(const PointCloud& cloud, int grid_refinements = 16) {
  if (grid_refinements < 1) throw Error(ErrorKind::BadParams, "need >= 1 refinement");
  const auto& X = cloud.points();
  const Eigen::Index n = cloud.n(), d = cloud.d();

  // Seed the search from the deepest of (a strided subset of) the samples.
  double best = -1.0;
  Point inc = X.row(0).transpose();
  const Eigen::Index stride = std::max<Eigen::Index>(1, n / 512);
  for (Eigen::Index i = 0; i < n; i += stride) {
    const Point xi = X.row(i).transpose();
    const double dep = detail::depth_dispatch(cloud, xi);
    if (dep > best) {
      best = dep;
      inc = xi;
    }
  }

  Eigen::VectorXd half = 0.5 * (X.colwise().maxCoeff() - X.colwise().minCoeff()).transpose();
  const int steps_per_axis = d == 2 ? 2 : 1;  // 5x5 grid in 2D, 3^d otherwise
  std::vector<Point> ties{inc};
  for (int level = 0; level < grid_refinements; ++level) {
    std::vector<Point> grid;
    Eigen::VectorXi idx = Eigen::VectorXi::Constant(d, -steps_per_axis);
    for (;;) {
      Point p = inc;
      for (Eigen::Index j = 0; j < d; ++j)
        p[j] += half[j] * static_cast<double>(idx[j]) / steps_per_axis;
      grid.push_back(p);
      Eigen::Index j = 0;
      while (j < d && ++idx[j] > steps_per_axis) idx[j++] = -steps_per_axis;
      if (j == d) break;
    }
    std::vector<Point> level_ties;
    Point level_best_pt = inc;
    double level_best = -1.0;
    for (const auto& p : grid) {
      const double dep = detail::depth_dispatch(cloud, p);
      if (dep > level_best) {
        level_best = dep;
        level_best_pt = p;
        level_ties.assign(1, p);
      } else if (dep == level_best) {
        level_ties.push_back(p);
      }
    }
    if (level_best > best) {
      best = level_best;
      inc = level_best_pt;
      ties = level_ties;
    } else if (level_best == best) {
      ties = level_ties;
    }
    half *= 0.5;
  }

  if (ties.size() > 1) {
    Point mean = Eigen::VectorXd::Zero(d);
    for (const auto& p : ties) mean += p;
    mean /= static_cast<double>(ties.size());
    if (detail::depth_dispatch(cloud, mean) >= best) return mean;
  }
  return inc;
}

/// Boundary of the central region D(tau) by per-ray bisection from the Tukey
/// median: along each direction v the largest t with HD(center + t v) >= tau
/// (depth is nonincreasing along rays from the median). Bisection tolerance
/// 1e-6 in t. Deterministic given (n_rays, seed); rays are independent and
/// evaluated in parallel when threads > 1.
inline DepthRegion depth_region_boundary(const PointCloud& cloud, double tau, int n_rays,
                                         std::uint64_t seed = 0x51e0d5ull, int threads = 1,
                                         std::optional<Point> median = std::nullopt) {
  if (n_rays < 8) throw Error(ErrorKind::BadParams, "need at least 8 rays");
  if (!(tau > 0.0 && tau < 1.0)) throw Error(ErrorKind::BadParams, "tau must lie in (0,1)");
  const Point center = median ? *median : tukey_median(cloud);
  const double center_depth = detail::depth_dispatch(cloud, center);
  if (tau > center_depth)
    throw Error(ErrorKind::EmptyRegion, "tau exceeds the depth of the Tukey median");

  const auto dirs = direction_set(cloud.d(), n_rays, seed);
  const double scale =
      (cloud.points().rowwise() - center.transpose()).rowwise().norm().maxCoeff();

  DepthRegion region;
  region.tau = tau;
  region.center = center;
  region.boundary.assign(static_cast<size_t>(n_rays), center);
  detail::parallel_for(n_rays, threads, [&](int k) {
    const Eigen::VectorXd v = dirs[static_cast<size_t>(k)].coords();
    double lo = 0.0, hi = std::max(scale, 1e-9);
    while (detail::depth_dispatch(cloud, center + hi * v) >= tau) {
      lo = hi;
      hi *= 2.0;
    }
    while (hi - lo > 1e-6) {
      const double mid = 0.5 * (lo + hi);
      if (detail::depth_dispatch(cloud, center + mid * v) >= tau)
        lo = mid;
      else
        hi = mid;
    }
    region.boundary[static_cast<size_t>(k)] = center + lo * v;
  });
  return region;
}

}  // namespace geoquant
