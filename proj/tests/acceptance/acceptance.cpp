// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Every run is deterministic (fixed seeds throughout).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "geoquant/geoquant.hpp"

using namespace geoquant;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void criterion(int number, const std::string& name, const std::function<bool(std::string&)>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  std::string detail;
  bool ok = false;
  try {
    ok = fn(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  const auto secs =
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0)
          .count() /
      1000.0;
  std::printf("%s criterion %2d [%s] (%.1fs)%s%s\n", ok ? "PASS" : "FAIL", number, name.c_str(),
              secs, detail.empty() ? "" : " -- ", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

PointCloud gaussian2(Eigen::Index n, std::uint64_t seed, const Matrix& cov = Matrix()) {
  DistributionSpec spec;
  spec.family = Family::Gaussian;
  spec.d = 2;
  spec.n = n;
  spec.seed = seed;
  spec.covariance = cov;
  return sample(spec);
}

PointCloud student2(Eigen::Index n, double nu, std::uint64_t seed) {
  DistributionSpec spec;
  spec.family = Family::StudentT;
  spec.nu = nu;
  spec.d = 2;
  spec.n = n;
  spec.seed = seed;
  return sample(spec);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---- criterion bodies -------------------------------------------------

bool solver_characterization(std::string& detail) {
  Rng rng(20240001);
  for (int t = 0; t < 50; ++t) {
    const Eigen::Index d = 2 + static_cast<Eigen::Index>(rng.uniform() * 3.999);
    const Eigen::Index n = 100 + static_cast<Eigen::Index>(rng.uniform() * 4900);
    DistributionSpec spec;
    spec.d = d;
    spec.n = n;
    spec.seed = 77000 + static_cast<std::uint64_t>(t);
    if (t % 5 == 4) {
      spec.family = Family::StudentT;
      spec.nu = 3.0;
    } else {
      spec.family = Family::Gaussian;
      Eigen::VectorXd scales(d);
      for (Eigen::Index j = 0; j < d; ++j) scales[j] = 0.5 + 2.0 * rng.uniform();
      spec.covariance = scales.asDiagonal().toDenseMatrix() * scales.asDiagonal().toDenseMatrix();
    }
    const auto cloud = sample(spec);
    const double alpha = rng.uniform() * 0.999;
    const UnitVector u(rng.normal_vector(d));
    const auto rep = solve_quantile(cloud, IndexVector(alpha, u));
    if (rep.status != SolveStatus::Converged || rep.residual > 1e-8) {
      detail = "case " + std::to_string(t) + " status " + to_string(rep.status) +
               " residual " + std::to_string(rep.residual);
      return false;
    }
  }
  return true;
}

bool variance_identity(std::string& detail) {
  Rng rng(20240002);
  for (int t = 0; t < 20; ++t) {
    const Eigen::Index n = 50 + static_cast<Eigen::Index>(rng.uniform() * 450);
    const auto cloud = gaussian2(n, 88000 + static_cast<std::uint64_t>(t));
    const Eigen::VectorXd q = rng.normal_vector(2) * 2.0;
    const auto stats = sign_expectation(cloud, q);
    std::vector<Eigen::VectorXd> us;
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::VectorXd diff = cloud.row(i) - q;
      us.push_back(diff / diff.norm());
    }
    double acc = 0.0;
    for (const auto& a : us)
      for (const auto& b : us) acc += (a - b).squaredNorm();
    acc /= 2.0 * static_cast<double>(n) * static_cast<double>(n);
    const double lhs = stats.norm_mean_u * stats.norm_mean_u;
    if (std::fabs(lhs - (1.0 - acc)) > 1e-10) {
      detail = "identity off by " + std::to_string(std::fabs(lhs - (1.0 - acc)));
      return false;
    }
  }
  return true;
}

bool affine_equivariance(std::string& detail) {
  Rng rng(20240003);
  SolverConfig cfg;
  cfg.residual_tol = 1e-10;
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const Eigen::Index d = t % 2 == 0 ? 2 : 3;
    DistributionSpec spec;
    spec.family = Family::Gaussian;
    spec.d = d;
    spec.n = 500;
    spec.seed = 99000 + static_cast<std::uint64_t>(t);
    const auto cloud = sample(spec);
    // random orthogonal via QR of a Gaussian matrix
    Matrix g(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j) g(i, j) = rng.normal();
    const Matrix R = Eigen::HouseholderQR<Matrix>(g).householderQ();
    Eigen::VectorXd shift = rng.normal_vector(d) * 2.0;
    const double alpha = rng.uniform() * 0.9;
    const UnitVector u(rng.normal_vector(d));

    Matrix moved = (cloud.points() * R.transpose()).rowwise() + shift.transpose();
    const auto mc = validate_cloud(moved);
    const auto lhs = solve_quantile(mc, IndexVector(alpha, u), cfg);
    const UnitVector u_back(R.transpose() * u.coords());
    const auto rhs = solve_quantile(cloud, IndexVector(alpha, u_back), cfg);
    worst = std::max(worst, (lhs.q - (R * rhs.q + shift)).norm());
  }
  detail = "max deviation " + std::to_string(worst);
  return worst <= 1e-6;
}

double brute_depth(const PointCloud& cloud, const Point& x);  // below

bool depth_matches_bruteforce(std::string& detail) {
  Rng rng(20240004);
  for (int t = 0; t < 30; ++t) {
    const Eigen::Index n = 5 + static_cast<Eigen::Index>(rng.uniform() * 195);
    Matrix pts(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
      pts(i, 0) = rng.normal();
      pts(i, 1) = rng.normal();
    }
    PointCloud cloud = validate_cloud(pts);
    for (int probe = 0; probe < 5; ++probe) {
      Eigen::Vector2d x(1.5 * rng.normal(), 1.5 * rng.normal());
      if (probe == 4) x = cloud.row(static_cast<Eigen::Index>(rng.uniform() * n));
      const double got = depth_exact_2d(cloud, x).value;
      const double want = brute_depth(cloud, x);
      if (got != want) {
        detail = "cloud " + std::to_string(t) + ": " + std::to_string(got) + " vs oracle " +
                 std::to_string(want);
        return false;
      }
    }
  }
  return true;
}

bool upper_bounds(std::string& detail) {
  const std::vector<std::pair<std::string, PointCloud>> clouds = {
      {"gaussian", gaussian2(10000, 555001)}, {"t1.5", student2(10000, 1.5, 555002)}};
  for (const auto& [name, cloud] : clouds) {
    for (double alpha : {0.9, 0.99, 0.999}) {
      const auto rep = solve_quantile(cloud, IndexVector(alpha, UnitVector::axis(2, 0)));
      if (rep.status != SolveStatus::Converged) {
        detail = name + " alpha " + std::to_string(alpha) + ": no convergence";
        return false;
      }
      const double k = auto_k_alpha(cloud, alpha, default_k_epsilon(alpha));
      const double ub1 = upper_bound_ub1(cloud, alpha, k);
      const double ub2 = upper_bound_ub2(cloud, alpha);
      const double nq = rep.q.norm();
      if (nq > ub1 + 1e-7 * (1.0 + ub1) || nq > ub2 + 1e-7 * (1.0 + ub2)) {
        detail = name + " alpha " + std::to_string(alpha) + ": |q|=" + std::to_string(nq) +
                 " ub1=" + std::to_string(ub1) + " ub2=" + std::to_string(ub2);
        return false;
      }
    }
  }
  return true;
}

constexpr std::uint64_t kPresetSeed = 4245;
constexpr Eigen::Index kPresetN = 20000;

bool inclusion(std::string& detail) {
  for (const std::string preset : {"fig1a", "fig1b-text"}) {
    const auto cloud = sample(preset_spec(preset, kPresetN, kPresetSeed));
    const auto mg = m_gamma_estimate(cloud, 0.01, 720, kPresetSeed);
    const double alpha = mid_admissible_alpha(mg.m_gamma, 2);
    const auto rep = check_inclusion(cloud, 0.01, alpha, 200, kPresetSeed, false);
    if (!rep.admissible) {
      detail = preset + ": not admissible";
      return false;
    }
    if (rep.n_tested < 200 || rep.n_violations != 0) {
      detail = preset + ": tested " + std::to_string(rep.n_tested) + ", violations " +
               std::to_string(rep.n_violations) +
               ", max|EU|=" + std::to_string(rep.max_norm_mean_u);
      return false;
    }
  }
  return true;
}

bool lower_bounds(std::string& detail) {
  for (const std::string preset : {"fig1a", "fig1b-text"}) {
    const auto cloud = sample(preset_spec(preset, kPresetN, kPresetSeed));
    const auto mg = m_gamma_estimate(cloud, 0.01, 720, kPresetSeed);
    const double alpha = mid_admissible_alpha(mg.m_gamma, 2);
    for (int k = 0; k < 8; ++k) {
      const UnitVector u = UnitVector::from_angle(2.0 * M_PI * k / 8.0);
      const auto rep = lower_bound_check(cloud, 0.01, alpha, u, SolverConfig{}, kPresetSeed);
      if (!rep.satisfied) {
        detail = preset + " direction " + std::to_string(k) + ": displacement " +
                 std::to_string(rep.observed_displacement) + " < bound " +
                 std::to_string(rep.lower_bound);
        return false;
      }
    }
  }
  return true;
}

bool m_gamma_consistency(std::string& detail) {
  const double pinned = m_gamma_rotinv(2, 0.5).m_gamma;
  if (std::fabs(pinned - 0.0833333333) > 1e-6) {
    detail = "analytic value " + std::to_string(pinned) + " != 0.0833333";
    return false;
  }
  const auto cloud = gaussian2(100000, 31008);
  for (double g : {0.1, 0.5}) {
    const double est = m_gamma_estimate(cloud, g, 720, 31008).m_gamma;
    const double exact = m_gamma_rotinv(2, g).m_gamma;
    const double rel = std::fabs(est - exact) / exact;
    if (rel > 0.05) {
      detail = "gamma " + std::to_string(g) + ": rel error " + std::to_string(rel);
      return false;
    }
  }
  return true;
}

bool first_order(std::string& detail) {
  const auto cloud = gaussian2(1000000, 616001);
  const auto rep = solve_quantile(cloud, IndexVector(0.999, UnitVector::axis(2, 0)));
  if (rep.status != SolveStatus::Converged) {
    detail = "no convergence";
    return false;
  }
  const double v = rep.q.squaredNorm() * 0.001;
  detail = "|q|^2 (1-alpha) = " + std::to_string(v);
  return v >= 0.45 && v <= 0.55;
}

bool third_order(std::string& detail) {
  const auto cloud = gaussian2(100000, 616002);
  const auto rep = expansion_sweep(cloud, UnitVector::axis(2, 0), {0.9, 0.99, 0.999});
  const auto& v = rep.third_order_values;
  detail = "values " + std::to_string(v[0]) + ", " + std::to_string(v[1]) + ", " +
           std::to_string(v[2]);
  if (std::fabs(v[2]) > 0.1) return false;
  for (size_t k = 1; k < v.size(); ++k)
    if (std::fabs(v[k]) > std::fabs(v[k - 1]) + 0.05) return false;
  return true;
}

bool direction_expansion(std::string& detail) {
  const auto cov = (Matrix(2, 2) << 1.0, 0.0, 0.0, 4.0).finished();
  const auto cloud = gaussian2(100000, 616003, cov);
  const UnitVector u(Eigen::Vector2d(1.0, 1.0));
  const auto rep = expansion_sweep(cloud, u, {0.9, 0.99, 0.999});
  const Eigen::Vector2d hand(-1.5 / std::sqrt(2.0), 1.5 / std::sqrt(2.0));
  const double rel = (rep.direction_gaps.back() - hand).norm() / hand.norm();
  detail = "relative gap error " + std::to_string(rel);
  return rel <= 0.2;
}

bool rate_slopes(std::string& detail) {
  const std::vector<double> ladder{0.9, 0.99, 0.999};
  const auto gfit = rate_fit(gaussian2(100000, 616004), UnitVector::axis(2, 0), ladder);
  const auto tfit = rate_fit(student2(100000, 1.5, 616005), UnitVector::axis(2, 0), ladder);
  detail = "gauss slope " + std::to_string(gfit.slope) + " (r2 " + std::to_string(gfit.r_squared) +
           "), t1.5 slope " + std::to_string(tfit.slope) + " (r2 " + std::to_string(tfit.r_squared) +
           ")";
  return gfit.slope >= 0.4 && gfit.slope <= 0.6 && tfit.slope > gfit.slope &&
         gfit.r_squared >= 0.95 && tfit.r_squared >= 0.95;
}

bool contours(std::string& detail) {
  const fs::path out_dir = fs::temp_directory_path() / "geoquant_acceptance";
  fs::create_directories(out_dir);
  const fs::path golden_dir = GEOQUANT_GOLDEN_DIR;
  double ecc_gauss = 0.0, ecc_copula = 0.0;

  for (const std::string preset : {"fig1a", "fig1b-text"}) {
    const std::string tag = preset == "fig1a" ? "fig1a" : "fig1b";
    const auto cloud_path = out_dir / (tag + "_cloud.csv");
    const auto prefix = (out_dir / tag).string();
    {
      std::ostringstream cmd;
      cmd << GEOQUANT_CLI_PATH << " sample --preset " << preset << " --n " << kPresetN
          << " --seed " << kPresetSeed << " --output " << cloud_path.string();
      if (std::system(cmd.str().c_str()) != 0) {
        detail = preset + ": sample failed";
        return false;
      }
    }
    {
      std::ostringstream cmd;
      cmd << GEOQUANT_CLI_PATH << " contour --kind bundle --input " << cloud_path.string()
          << " --gamma 0.01 --ndirs 180 --seed " << kPresetSeed << " --output-prefix " << prefix;
      if (std::system(cmd.str().c_str()) != 0) {
        detail = preset + ": contour failed";
        return false;
      }
    }

    // library-level invariants on the same data
    const auto cloud = sample(preset_spec(preset, kPresetN, kPresetSeed));
    const auto mg = m_gamma_estimate(cloud, 0.01, 720, kPresetSeed);
    const double alpha = mid_admissible_alpha(mg.m_gamma, 2);
    const auto bundle = contour_experiment(cloud, alpha, 0.01, 180, SolverConfig{}, kPresetSeed);
    for (const auto& b : bundle.d_theory.boundary) {
      if (sign_expectation(cloud, b).norm_mean_u > alpha + kInclusionSlack) {
        detail = preset + ": containment violated at a theory-boundary point";
        return false;
      }
    }
    (preset == "fig1a" ? ecc_gauss : ecc_copula) = bundle.eccentricity;

    for (const std::string suffix :
         {"_galpha.csv", "_dbest.csv", "_dtheory.csv", "_manifest.json"}) {
      const auto got = slurp(prefix + suffix);
      const auto want = slurp(golden_dir / (tag + suffix));
      if (want.empty()) {
        detail = "golden file missing: " + (golden_dir / (tag + suffix)).string();
        return false;
      }
      if (got != want) {
        detail = tag + suffix + " differs from the golden file";
        return false;
      }
    }
  }
  detail = "ecc gauss " + std::to_string(ecc_gauss) + " vs copula " + std::to_string(ecc_copula);
  return ecc_gauss > ecc_copula;
}

// Brute-force depth oracle (duplicated into the acceptance binary on purpose:
// the suite stays self-contained).
double brute_depth(const PointCloud& cloud, const Point& x) {
  const auto& X = cloud.points();
  const Eigen::Index n = cloud.n();
  std::vector<Eigen::Vector2d> d;
  Eigen::Index zeros = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Vector2d v(X(i, 0) - x[0], X(i, 1) - x[1]);
    if (v.norm() <= 1e-12)
      ++zeros;
    else
      d.push_back(v);
  }
  if (d.empty()) return 1.0;
  const auto count_triple = [&](const Eigen::Vector2d& v) {
    Eigen::Index at = 0, ccw = 0, cw = 0;
    for (const auto& p : d) {
      const double dot = v.x() * p.x() + v.y() * p.y();
      const double cross = v.x() * p.y() - v.y() * p.x();
      if (dot > 0.0) {
        ++at;
        ++ccw;
        ++cw;
      } else if (dot == 0.0) {
        ++at;
        if (cross > 0.0) ++ccw;
        if (cross < 0.0) ++cw;
      }
    }
    return std::min(at, std::min(ccw, cw));
  };
  Eigen::Index best = static_cast<Eigen::Index>(d.size());
  for (size_t i = 0; i < d.size(); ++i) {
    const Eigen::Vector2d perp(-d[i].y(), d[i].x());
    best = std::min(best, count_triple(perp));
    best = std::min(best, count_triple(-perp));
    best = std::min(best, count_triple(d[i]));
    best = std::min(best, count_triple(-d[i]));
    for (size_t j = i + 1; j < d.size(); ++j) {
      const Eigen::Vector2d diff = d[i] - d[j];
      const Eigen::Vector2d pp(-diff.y(), diff.x());
      best = std::min(best, count_triple(pp));
      best = std::min(best, count_triple(-pp));
    }
  }
  return static_cast<double>(zeros + best) / static_cast<double>(n);
}

}  // namespace

int main() {
  criterion(1, "solver characterization", solver_characterization);
  criterion(2, "variance identity", variance_identity);
  criterion(3, "affine equivariance", affine_equivariance);
  criterion(4, "exact 2D depth vs brute force", depth_matches_bruteforce);
  criterion(5, "upper bounds UB1/UB2", upper_bounds);
  criterion(6, "depth-region inclusion", inclusion);
  criterion(7, "univariate lower bound", lower_bounds);
  criterion(8, "M_gamma consistency", m_gamma_consistency);
  criterion(9, "first-order limit", first_order);
  criterion(10, "third-order zero limit", third_order);
  criterion(11, "direction expansion limit", direction_expansion);
  criterion(12, "rate slopes", rate_slopes);
  criterion(13, "contour bundle reproduction", contours);

  if (g_failures == 0)
    std::printf("all 13 criteria passed\n");
  else
    std::printf("%d criteria FAILED\n", g_failures);
  return g_failures;
}
