#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "geoquant/error.hpp"

namespace geoquant {

using Point = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

namespace tol {
// Default tolerances; solver and rank checks take these as overridable
// parameters, unit norms are renormalized on construction.
inline constexpr double unit_norm = 1e-12;
inline constexpr double rank = 1e-10;
inline constexpr double solver_residual = 1e-8;
}  // namespace tol

/// A direction on the unit sphere S^{d-1}; renormalized on construction.
class UnitVector {
 public:
  explicit UnitVector(const Eigen::VectorXd& v) {
    const double n = v.norm();
    if (!(n > 0.0) || !v.allFinite())
      throw Error(ErrorKind::BadParams, "cannot normalize zero or non-finite vector");
    coords_ = v / n;
  }

  static UnitVector axis(Eigen::Index d, Eigen::Index k) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(d);
    v[k] = 1.0;
    return UnitVector(v);
  }

  /// 2D direction at the given angle.
  static UnitVector from_angle(double phi) {
    Eigen::VectorXd v(2);
    v << std::cos(phi), std::sin(phi);
    return UnitVector(v);
  }

  const Eigen::VectorXd& coords() const { return coords_; }
  Eigen::Index dim() const { return coords_.size(); }
  double operator[](Eigen::Index i) const { return coords_[i]; }

  UnitVector operator-() const {
    UnitVector u(*this);
    u.coords_ = -u.coords_;
    return u;
  }

 private:
  Eigen::VectorXd coords_;
};

/// The quantile index alpha*u with 0 <= alpha < 1.
struct IndexVector {
  double alpha;
  UnitVector direction;

  IndexVector(double a, UnitVector u) : alpha(a), direction(std::move(u)) {
    if (!(alpha >= 0.0 && alpha < 1.0))
      throw Error(ErrorKind::BadParams, "alpha must lie in [0,1)");
  }

  Eigen::VectorXd vector() const { return alpha * direction.coords(); }
};

/// The directional cap-mass constant M_gamma together with how it was obtained.
struct GammaConstant {
  enum class Method { AnalyticRotInv, MonteCarlo };

  double gamma;
  double m_gamma;
  Method method;

  GammaConstant(double g, double m, Method how) : gamma(g), m_gamma(m), method(how) {
    if (!(gamma > 0.0 && gamma < 1.0))
      throw Error(ErrorKind::BadParams, "gamma must lie in (0,1)");
    if (!(m_gamma > 0.0 && m_gamma < 1.0) || m_gamma > 1.0 - gamma + 1e-15)
      throw Error(ErrorKind::BadParams, "m_gamma must lie in (0, 1-gamma]");
  }
};

inline const char* to_string(GammaConstant::Method m) {
  return m == GammaConstant::Method::AnalyticRotInv ? "analytic-rotinv" : "monte-carlo";
}

/// An immutable n x d sample of points, n >= d+1, d >= 2, affine rank >= 2.
///
/// The affine-rank check rejects clouds supported on a single line, which is
/// where uniqueness of the geometric quantile breaks down.
class PointCloud {
 public:
  const Matrix& points() const { return points_; }
  Eigen::Index n() const { return points_.rows(); }
  Eigen::Index d() const { return points_.cols(); }
  Eigen::VectorXd row(Eigen::Index i) const { return points_.row(i).transpose(); }

  friend PointCloud validate_cloud(const Matrix& points, double rank_tol);

 private:
  explicit PointCloud(Matrix pts) : points_(std::move(pts)) {}
  Matrix points_;
};

/// Validates raw points into a PointCloud. Rank is checked on centered points:
/// the cloud is degenerate when the second singular value is below
/// rank_tol * (largest singular value).
inline PointCloud validate_cloud(const Matrix& points, double rank_tol = tol::rank) {
  const Eigen::Index n = points.rows(), d = points.cols();
  if (d < 2) throw Error(ErrorKind::DimensionMismatch, "dimension must be >= 2");
  if (n < 3 || n < d + 1) throw Error(ErrorKind::TooFewPoints, "need at least max(3, d+1) points");
  if (!points.allFinite()) throw Error(ErrorKind::NonFinite, "points contain NaN or Inf");

  // Squared singular values of the centered matrix via its d x d Gram matrix.
  const Matrix centered = points.rowwise() - points.colwise().mean();
  const Matrix gram = centered.transpose() * centered;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
  const Eigen::VectorXd ev = eig.eigenvalues();  // ascending
  const double largest = std::max(ev[d - 1], 0.0);
  const double second = std::max(ev[d - 2], 0.0);
  if (second <= rank_tol * rank_tol * largest)
    throw Error(ErrorKind::DegenerateSupport, "points have affine rank <= 1");
  return PointCloud(points);
}

/// Coordinate-wise median; the solver's default starting point.
inline Eigen::VectorXd coordinate_median(const PointCloud& cloud) {
  const Eigen::Index n = cloud.n(), d = cloud.d();
  Eigen::VectorXd med(d);
  std::vector<double> col(static_cast<size_t>(n));
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) col[static_cast<size_t>(i)] = cloud.points()(i, j);
    auto mid = col.begin() + n / 2;
    std::nth_element(col.begin(), mid, col.end());
    double m = *mid;
    if (n % 2 == 0) {
      auto lo = std::max_element(col.begin(), mid);
      m = 0.5 * (m + *lo);
    }
    med[j] = m;
  }
  return med;
}

}  // namespace geoquant
