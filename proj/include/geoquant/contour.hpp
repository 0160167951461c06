#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "geoquant/bounds.hpp"
#include "geoquant/core.hpp"
#include "geoquant/depth.hpp"
#include "geoquant/solver.hpp"

namespace geoquant {

/// The three-contour comparison: the quantile contour dG(alpha), the largest
/// depth region fitting inside it (level alpha_best, clamped to 1/n when the
/// whole contour lies outside the sample hull), and the theoretical region at
/// level (1 - alpha^2)/M_gamma.
struct ContourBundle {
  std::vector<Point> g_alpha;  // quantile contour, fan order
  DepthRegion d_best;
  DepthRegion d_theory;
  double alpha = 0.0;
  double alpha_best = 0.0;  // max sampled depth on the quantile contour
  double m_gamma = 0.0;
  Point theta;
  double eccentricity = 0.0;  // max/min contour radius about theta
};

/// For d = 2, the middle of the admissible alpha range: the depth threshold
/// (1-alpha^2)/M sits at half the universal max-depth bound.
inline double mid_admissible_alpha(double m_gamma, Eigen::Index d, bool symmetric = false) {
  const double bound = symmetric ? 0.5 : 1.0 / (static_cast<double>(d) + 1.0);
  return std::sqrt(1.0 - 0.5 * m_gamma * bound);
}

inline ContourBundle contour_experiment(const PointCloud& cloud, double alpha, double gamma,
                                        int n_dirs, const SolverConfig& cfg = {},
                                        std::uint64_t seed = 0xc0full) {
  if (n_dirs < 1) throw Error(ErrorKind::BadParams, "n_dirs must be >= 1");
  const auto mg = m_gamma_estimate(cloud, gamma, detail::m_gamma_dirs(cloud.d()), seed);
  const double threshold = (1.0 - alpha * alpha) / mg.m_gamma;
  if (!(threshold < detail::max_depth_bound(cloud.d(), false)))
    throw Error(ErrorKind::NotAdmissible, "alpha is below the admissible range for this gamma");

  ContourBundle bundle;
  bundle.alpha = alpha;
  bundle.m_gamma = mg.m_gamma;
  bundle.theta = tukey_median(cloud);

  // Fan of quantile solves, warm-started around the circle.
  const auto dirs = direction_set(cloud.d(), n_dirs, seed ^ 0xfa9ull);
  std::optional<Point> warm;
  for (const auto& u : dirs) {
    const SolveReport rep = solve_quantile(cloud, IndexVector(alpha, u), cfg, warm);
    warm = rep.q;
    bundle.g_alpha.push_back(rep.q);
  }

  double best_depth = 0.0;
  double rmin = std::numeric_limits<double>::infinity(), rmax = 0.0;
  for (const auto& q : bundle.g_alpha) {
    best_depth = std::max(best_depth, detail::depth_dispatch(cloud, q));
    const double r = (q - bundle.theta).norm();
    rmin = std::min(rmin, r);
    rmax = std::max(rmax, r);
  }
  bundle.alpha_best = best_depth;
  bundle.eccentricity = rmax / rmin;

  const double n_inv = 1.0 / static_cast<double>(cloud.n());
  const int region_rays = std::max(n_dirs, 8);  // regions keep their own floor
  bundle.d_best = depth_region_boundary(cloud, std::max(bundle.alpha_best, n_inv), region_rays,
                                        seed ^ 0xdbe57ull, 1, bundle.theta);
  bundle.d_theory =
      depth_region_boundary(cloud, threshold, region_rays, seed ^ 0xd7e0ull, 1, bundle.theta);
  return bundle;
}

}  // namespace geoquant
