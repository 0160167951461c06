#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "geoquant/core.hpp"
#include "geoquant/rng.hpp"
#include "geoquant/special.hpp"

namespace geoquant {

enum class Family {
  Gaussian,
  StudentT,  // elliptical: gaussian / sqrt(chi2_nu / nu)
  Cauchy,    // elliptical Student-t with nu = 1
  GaussianCopulaTMargins,
  ExponentialCentered,  // iid componentwise Exp(1) - 1
};

inline const char* to_string(Family f) {
  switch (f) {
    case Family::Gaussian: return "gaussian";
    case Family::StudentT: return "student-t";
    case Family::Cauchy: return "cauchy";
    case Family::GaussianCopulaTMargins: return "gaussian-copula-t";
    case Family::ExponentialCentered: return "exponential-centered";
  }
  return "unknown";
}

inline Family family_from_string(const std::string& s) {
  if (s == "gaussian") return Family::Gaussian;
  if (s == "student-t") return Family::StudentT;
  if (s == "cauchy") return Family::Cauchy;
  if (s == "gaussian-copula-t") return Family::GaussianCopulaTMargins;
  if (s == "exponential-centered") return Family::ExponentialCentered;
  throw Error(ErrorKind::BadParams, "unknown family: " + s);
}

struct DistributionSpec {
  Family family = Family::Gaussian;
  Eigen::Index d = 2;
  Matrix covariance;       // gaussian / student-t / cauchy; correlation for the copula
  double nu = 1.0;         // elliptical student-t degrees of freedom
  Eigen::VectorXd nu_margins;  // copula: one nu per margin
  Eigen::VectorXd mean;    // optional shift; zero when empty
  Eigen::Index n = 0;
  std::uint64_t seed = 0;

  /// Equicorrelated covariance shorthand.
  static Matrix correlation(Eigen::Index d, double rho) {
    Matrix c = Matrix::Constant(d, d, rho);
    c.diagonal().setOnes();
    return c;
  }
};

/// The two bivariate setups used by the contour experiment, plus the caption
/// variant of the second (the source figure labels it with different margins
/// than the accompanying text; both ship).
inline DistributionSpec preset_spec(const std::string& name, Eigen::Index n, std::uint64_t seed) {
  DistributionSpec spec;
  spec.d = 2;
  spec.n = n;
  spec.seed = seed;
  spec.covariance = DistributionSpec::correlation(2, 0.7);
  if (name == "fig1a") {
    spec.family = Family::Gaussian;
  } else if (name == "fig1b-text") {
    spec.family = Family::GaussianCopulaTMargins;
    spec.nu_margins = Eigen::Vector2d(1.2, 2.2);
  } else if (name == "fig1b-caption") {
    spec.family = Family::GaussianCopulaTMargins;
    spec.nu_margins = Eigen::Vector2d(3.0, 10.0);
  } else {
    throw Error(ErrorKind::BadParams, "unknown preset: " + name);
  }
  return spec;
}

namespace detail {

inline Matrix cholesky_or_throw(const Matrix& cov) {
  if (cov.rows() != cov.cols() || !cov.isApprox(cov.transpose(), 1e-12))
    throw Error(ErrorKind::BadParams, "covariance must be symmetric");
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success)
    throw Error(ErrorKind::BadParams, "covariance must be positive definite");
  return llt.matrixL();
}

/// Student-t margin transform of a standard normal value, routed through the
/// survival function so deep tails keep full precision.
inline double t_margin_from_normal(double z, double nu) {
  if (z >= 0.0) return special::student_t_isf(special::norm_sf(z), nu);
  return -special::student_t_isf(special::norm_sf(-z), nu);
}

}  // namespace detail

/// Draws a deterministic sample for the given spec. Identical specs produce
/// bit-identical clouds.
inline PointCloud sample(const DistributionSpec& spec) {
  const Eigen::Index n = spec.n, d = spec.d;
  if (d < 2) throw Error(ErrorKind::BadParams, "dimension must be >= 2");
  if (n < d + 1) throw Error(ErrorKind::BadParams, "need n >= d + 1");
  Rng rng(spec.seed);
  Matrix pts(n, d);

  switch (spec.family) {
    case Family::Gaussian: {
      const Matrix L = detail::cholesky_or_throw(
          spec.covariance.size() ? spec.covariance : Matrix::Identity(d, d));
      for (Eigen::Index i = 0; i < n; ++i)
        pts.row(i) = (L * rng.normal_vector(d)).transpose();
      break;
    }
    case Family::StudentT:
    case Family::Cauchy: {
      const double nu = spec.family == Family::Cauchy ? 1.0 : spec.nu;
      if (!(nu > 0.0)) throw Error(ErrorKind::BadParams, "nu must be positive");
      const Matrix L = detail::cholesky_or_throw(
          spec.covariance.size() ? spec.covariance : Matrix::Identity(d, d));
      for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::VectorXd z = L * rng.normal_vector(d);
        const double scale = std::sqrt(rng.chi_squared(nu) / nu);
        pts.row(i) = (z / scale).transpose();
      }
      break;
    }
    case Family::GaussianCopulaTMargins: {
      if (spec.nu_margins.size() != d)
        throw Error(ErrorKind::BadParams, "need one nu per margin");
      if ((spec.nu_margins.array() <= 0.0).any())
        throw Error(ErrorKind::BadParams, "nu must be positive");
      const Matrix L = detail::cholesky_or_throw(
          spec.covariance.size() ? spec.covariance : DistributionSpec::correlation(d, 0.0));
      for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::VectorXd z = L * rng.normal_vector(d);
        for (Eigen::Index j = 0; j < d; ++j)
          pts(i, j) = detail::t_margin_from_normal(z[j], spec.nu_margins[j]);
      }
      break;
    }
    case Family::ExponentialCentered: {
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < d; ++j) pts(i, j) = rng.exponential() - 1.0;
      break;
    }
  }

  if (spec.mean.size()) {
    if (spec.mean.size() != d) throw Error(ErrorKind::BadParams, "mean dimension mismatch");
    pts.rowwise() += spec.mean.transpose();
  }
  return validate_cloud(pts);
}

}  // namespace geoquant
