#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "geoquant/core.hpp"

namespace geoquant {

/// Seeded random source with explicit transforms on top of mt19937_64, so the
/// produced streams do not depend on the standard library's distribution
/// implementations. Identical seeds give identical streams.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Uniform in [0,1).
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  /// Uniform in (0,1].
  double uniform_pos() { return (static_cast<double>(gen_() >> 11) + 1.0) * 0x1.0p-53; }

  /// Standard normal via Box-Muller (pairs cached).
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_pos();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  double exponential() { return -std::log(uniform_pos()); }

  /// Gamma(shape, scale 1) by Marsaglia-Tsang, with the shape<1 boost.
  double gamma(double shape) {
    if (shape < 1.0) {
      const double u = uniform_pos();
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform_pos();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  double chi_squared(double nu) { return 2.0 * gamma(0.5 * nu); }

  Eigen::VectorXd normal_vector(Eigen::Index d) {
    Eigen::VectorXd z(d);
    for (Eigen::Index i = 0; i < d; ++i) z[i] = normal();
    return z;
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

/// Deterministic direction set on S^{d-1}.
/// d=2: uniform angular grid. d=3: Fibonacci spiral. d>=4: seeded normalized
/// Gaussian vectors. All variants are reproducible given (d, count, seed).
inline std::vector<UnitVector> direction_set(Eigen::Index d, int count, std::uint64_t seed) {
  if (count < 1) throw Error(ErrorKind::BadParams, "need at least one direction");
  std::vector<UnitVector> dirs;
  dirs.reserve(static_cast<size_t>(count));
  if (d == 2) {
    for (int k = 0; k < count; ++k)
      dirs.push_back(UnitVector::from_angle(2.0 * std::numbers::pi * k / count));
  } else if (d == 3) {
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < count; ++k) {
      const double z = 1.0 - 2.0 * (k + 0.5) / count;
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      Eigen::VectorXd v(3);
      v << r * std::cos(golden * k), r * std::sin(golden * k), z;
      dirs.emplace_back(v);
    }
  } else {
    Rng rng(seed);
    for (int k = 0; k < count; ++k) {
      Eigen::VectorXd v = rng.normal_vector(d);
      while (v.norm() == 0.0) v = rng.normal_vector(d);
      dirs.emplace_back(v);
    }
  }
  return dirs;
}

}  // namespace geoquant
