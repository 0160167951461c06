#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "geoquant/core.hpp"

namespace geoquant {

struct SolverConfig {
  int max_iters = 10000;
  double residual_tol = tol::solver_residual;
  double damping = 1.0;  // in (0,1]; halved on objective increase, floor 0.1
  double singular_eps = 1e-12;

  void validate() const {
    if (max_iters < 1) throw Error(ErrorKind::BadParams, "max_iters must be >= 1");
    if (!(residual_tol > 0.0)) throw Error(ErrorKind::BadParams, "residual_tol must be > 0");
    if (!(damping > 0.0 && damping <= 1.0))
      throw Error(ErrorKind::BadParams, "damping must lie in (0,1]");
  }
};

enum class SolveStatus { Converged, MaxIters, AtomHit };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "Converged";
    case SolveStatus::MaxIters: return "MaxIters";
    case SolveStatus::AtomHit: return "AtomHit";
  }
  return "Unknown";
}

struct SolveReport {
  Point q;
  double residual = 0.0;  // distance of the fixed-point equation from zero
  int iters = 0;
  SolveStatus status = SolveStatus::MaxIters;
};

struct SignVectorStats {
  Eigen::VectorXd mean_u;
  double norm_mean_u = 0.0;
};

/// The quantile objective: (1/n) sum_i (|x_i - q| - |x_i|) - <alpha*u, q>.
inline double objective(const PointCloud& cloud, const IndexVector& index, const Point& q) {
  const auto& X = cloud.points();
  const Eigen::Index n = cloud.n();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    acc += (X.row(i).transpose() - q).norm() - X.row(i).norm();
  return acc / static_cast<double>(n) - index.vector().dot(q);
}

/// Mean of the unit vectors (x_i - q)/|x_i - q|. Throws AtomHitError when q
/// coincides with a sample point within singular_eps.
inline SignVectorStats sign_expectation(const PointCloud& cloud, const Point& q,
                                        double singular_eps = 1e-12) {
  const auto& X = cloud.points();
  const Eigen::Index n = cloud.n();
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(cloud.d());
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd diff = X.row(i).transpose() - q;
    const double r = diff.norm();
    if (r <= singular_eps)
      throw AtomHitError(static_cast<long>(i), "query point coincides with sample point");
    acc += diff / r;
  }
  SignVectorStats out;
  out.mean_u = acc / static_cast<double>(n);
  out.norm_mean_u = out.mean_u.norm();
  return out;
}

namespace detail {

struct FieldEval {
  Eigen::VectorXd residual_vec;  // mean_u + alpha*u
  double residual = 0.0;
  Eigen::VectorXd weighted_sum;  // sum x_i / r_i
  double weight_total = 0.0;     // sum 1 / r_i
  Matrix unit_outer;             // (1/n) sum u_i u_i^T / r_i   (for the Newton step)
  double min_r = 0.0;
  Eigen::Index min_idx = 0;
};

inline FieldEval eval_field(const PointCloud& cloud, const Eigen::VectorXd& target,
                            const Point& q, bool with_jacobian) {
  const auto& X = cloud.points();
  const Eigen::Index n = cloud.n(), d = cloud.d();
  FieldEval ev;
  ev.residual_vec = Eigen::VectorXd::Zero(d);
  ev.weighted_sum = Eigen::VectorXd::Zero(d);
  if (with_jacobian) ev.unit_outer = Matrix::Zero(d, d);
  ev.min_r = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd diff = X.row(i).transpose() - q;
    const double r = diff.norm();
    if (r < ev.min_r) {
      ev.min_r = r;
      ev.min_idx = i;
    }
    if (r == 0.0) continue;  // excluded; caller handles atoms via min_r
    const Eigen::VectorXd u = diff / r;
    ev.residual_vec += u;
    ev.weighted_sum += X.row(i).transpose() / r;
    ev.weight_total += 1.0 / r;
    if (with_jacobian) ev.unit_outer += (u * u.transpose()) / r;
  }
  ev.residual_vec /= static_cast<double>(n);
  ev.residual_vec += target;
  ev.residual = ev.residual_vec.norm();
  if (with_jacobian) ev.unit_outer /= static_cast<double>(n);
  return ev;
}

}  // namespace detail

/// Solves the fixed-point characterization (1/n) sum (x_i - q)/|x_i - q| = -alpha*u.
///
/// Base iteration is the damped Weiszfeld map
///   q+ = (sum x_i/r_i + n*alpha*u) / (sum 1/r_i),
/// with damping halved (floor 0.1) whenever the objective increases. Once the
/// residual is moderate, a Newton step on the residual field is attempted each
/// iteration (backtracked, accepted only on strict residual decrease), which
/// removes the O(1/(1-alpha)) fixed-point iteration count at extreme alpha.
///
/// Atoms: when an iterate lands within singular_eps of a sample point, the
/// subgradient optimality test with threshold 1/n decides between returning
/// that sample point (Converged, residual = optimality gap clamped at 0) and
/// escaping along the residual direction by singular_eps*(1+|x|).
inline SolveReport solve_quantile(const PointCloud& cloud, const IndexVector& index,
                                  const SolverConfig& cfg = {},
                                  std::optional<Point> initial = std::nullopt) {
  cfg.validate();
  const auto& X = cloud.points();
  const Eigen::Index n = cloud.n(), d = cloud.d();
  const Eigen::VectorXd target = index.vector();

  Point q = initial ? *initial : coordinate_median(cloud);
  double damping = cfg.damping;
  double f_cur = objective(cloud, index, q);

  SolveReport best;
  best.q = q;
  best.residual = std::numeric_limits<double>::infinity();

  int atom_hits = 0;
  for (int it = 0; it < cfg.max_iters; ++it) {
    auto ev = detail::eval_field(cloud, target, q, /*with_jacobian=*/true);

    if (ev.min_r <= cfg.singular_eps) {
      // Subgradient test at the atom: alpha*u plus the mean over the other
      // points must fit inside the atom's weight (1/n per coinciding point).
      const Eigen::Index j = ev.min_idx;
      Eigen::VectorXd excl = Eigen::VectorXd::Zero(d);
      Eigen::Index multiplicity = 0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::VectorXd diff = X.row(i).transpose() - q;
        const double r = diff.norm();
        if (r <= cfg.singular_eps) {
          ++multiplicity;
          continue;
        }
        excl += diff / r;
      }
      excl /= static_cast<double>(n);
      excl += target;
      const double gap = excl.norm();
      if (gap <= static_cast<double>(multiplicity) / static_cast<double>(n)) {
        SolveReport rep;
        rep.q = X.row(j).transpose();
        rep.residual = 0.0;
        rep.iters = it;
        rep.status = SolveStatus::Converged;
        return rep;
      }
      if (++atom_hits > 100) {
        SolveReport rep;
        rep.q = X.row(j).transpose();
        rep.residual = gap;
        rep.iters = it;
        rep.status = SolveStatus::AtomHit;
        return rep;
      }
      const double step = cfg.singular_eps * (1.0 + X.row(j).norm());
      q += step * (excl / gap);
      f_cur = objective(cloud, index, q);
      continue;
    }

    if (ev.residual < best.residual) {
      best.q = q;
      best.residual = ev.residual;
      best.iters = it;
    }
    if (ev.residual <= cfg.residual_tol) {
      best.status = SolveStatus::Converged;
      return best;
    }

    bool stepped = false;
    if (ev.residual < 0.9) {
      // J = -(S*I - (1/n) sum u_i u_i^T / r_i), S = (1/n) sum 1/r_i
      const double S = ev.weight_total / static_cast<double>(n);
      Matrix J = ev.unit_outer;
      J.diagonal().array() -= S;
      const Eigen::VectorXd dq = J.partialPivLu().solve(-ev.residual_vec);
      if (dq.allFinite()) {
        double t = 1.0;
        for (int bt = 0; bt < 30; ++bt) {
          const Point qn = q + t * dq;
          auto evn = detail::eval_field(cloud, target, qn, false);
          if (evn.min_r > cfg.singular_eps && evn.residual < ev.residual) {
            q = qn;
            stepped = true;
            break;
          }
          t *= 0.5;
        }
      }
    }

    if (!stepped) {
      const Eigen::VectorXd q_w =
          (ev.weighted_sum + static_cast<double>(n) * target) / ev.weight_total;
      Point qn = (1.0 - damping) * q + damping * q_w;
      double f_new = objective(cloud, index, qn);
      int halvings = 0;
      while (f_new > f_cur && damping > 0.1 && halvings < 8) {
        damping = std::max(0.1, 0.5 * damping);
        qn = (1.0 - damping) * q + damping * q_w;
        f_new = objective(cloud, index, qn);
        ++halvings;
      }
      q = qn;
      f_cur = f_new;
    } else {
      f_cur = objective(cloud, index, q);
    }
  }

  // The loop exits before evaluating the final update; account for it.
  auto ev = detail::eval_field(cloud, target, q, false);
  if (ev.min_r > cfg.singular_eps && ev.residual < best.residual) {
    best.q = q;
    best.residual = ev.residual;
    best.iters = cfg.max_iters;
  }
  best.status =
      best.residual <= cfg.residual_tol ? SolveStatus::Converged : SolveStatus::MaxIters;
  return best;
}

struct NormCurvePoint {
  double alpha;
  SolveReport report;
};

/// Per-alpha solves along a strictly increasing ladder, warm-started from the
/// previous solution (first solve starts at the coordinate-wise median).
inline std::vector<NormCurvePoint> quantile_norm_curve(const PointCloud& cloud,
                                                       const UnitVector& u,
                                                       const std::vector<double>& alphas,
                                                       const SolverConfig& cfg = {}) {
  if (alphas.empty()) throw Error(ErrorKind::BadParams, "alpha list is empty");
  for (size_t k = 0; k < alphas.size(); ++k) {
    if (!(alphas[k] >= 0.0 && alphas[k] < 1.0))
      throw Error(ErrorKind::BadParams, "alphas must lie in [0,1)");
    if (k > 0 && !(alphas[k] > alphas[k - 1]))
      throw Error(ErrorKind::BadParams, "alphas must be strictly increasing");
  }
  std::vector<NormCurvePoint> out;
  out.reserve(alphas.size());
  std::optional<Point> warm;
  for (double a : alphas) {
    SolveReport rep = solve_quantile(cloud, IndexVector(a, u), cfg, warm);
    warm = rep.q;
    out.push_back({a, std::move(rep)});
  }
  return out;
}

}  // namespace geoquant
