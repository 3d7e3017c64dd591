// Adaptation to an unknown contamination rate by Lepski's method: run the
// estimator on a geometric grid of rates and keep the smallest rate whose
// confidence ball still meets all the balls of the larger rates.
#pragma once

#include "irmean/estimator.hpp"
#include "irmean/geometry.hpp"
#include "irmean/linalg.hpp"
#include "irmean/simulate.hpp"
#include "irmean/types.hpp"

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

namespace irmean {

struct LepskiConfig {
  double a = 0.9;       // grid ratio
  double delta = 0.1;   // tolerance level
  double a5 = 1.0;      // radius constant, see calibrate_a5
  double sigma_op = 1.0;
  CovarianceSpec cov = CovarianceSpec::unknown_isotropic();
  SolverConfig solver{};

  void validate() const {
    require(a > 0.0 && a < 1.0, ErrorCode::InvalidRatio, "grid ratio must lie in (0, 1)");
    require(delta > 0.0 && delta < 1.0, ErrorCode::InvalidParams, "delta must lie in (0, 1)");
    require(a5 > 0.0 && std::isfinite(a5), ErrorCode::InvalidParams, "a5 must be positive");
    require(sigma_op > 0.0 && std::isfinite(sigma_op), ErrorCode::InvalidParams,
            "sigma_op must be positive");
    solver.validate();
  }
};

/// floor(0.5 log_a(p / n))
inline int grid_length(double a, Index p, Index n) {
  require(a > 0.0 && a < 1.0, ErrorCode::InvalidRatio, "grid ratio must lie in (0, 1)");
  require(p >= 1 && p <= n, ErrorCode::InvalidParams, "need 1 <= p <= n");
  const double raw = 0.5 * std::log(static_cast<double>(p) / static_cast<double>(n)) / std::log(a);
  return std::max(0, static_cast<int>(std::floor(raw + 1e-12)));
}

/// eps_l = a^l eps_0 for l = 1..l_max, eps_0 the breakdown threshold.
inline std::vector<double> epsilon_grid(double a, Index p, Index n) {
  const int length = grid_length(a, p, n);
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(length));
  double eps = breakdown_threshold();
  for (int l = 1; l <= length; ++l) {
    eps *= a;
    grid.push_back(eps);
  }
  return grid;
}

/// R(z) = A5 sqrt(sigma_op) / (1 - 2z - sqrt(z(1-z)))
///        * (sqrt((p + log(4 l_max / delta)) / n) + z sqrt(log(1/z))),
/// with z sqrt(log 1/z) read as 0 at z = 0. For an arbitrary unknown
/// covariance the contamination term is 3 sqrt(z) instead.
inline double lepski_radius(double z, const LepskiConfig& cfg, Index p, Index n, int l_max) {
  require(z >= 0.0 && z < breakdown_threshold(), ErrorCode::ZOutOfRange,
          "z must lie in [0, (5 - sqrt 5)/10)");
  require(l_max >= 1, ErrorCode::EmptyGrid, "l_max must be >= 1");
  require(n >= 1 && p >= 1, ErrorCode::InvalidParams, "need n, p >= 1");
  const double denominator = 1.0 - 2.0 * z - std::sqrt(z * (1.0 - z));
  const double stochastic = std::sqrt(
      (static_cast<double>(p) + std::log(4.0 * static_cast<double>(l_max) / cfg.delta)) /
      static_cast<double>(n));
  double contamination = 0.0;
  if (cfg.cov.kind() == CovarianceSpec::Kind::UnknownArbitrary) {
    contamination = 3.0 * std::sqrt(z);
  } else if (z > 0.0) {
    contamination = z * std::sqrt(std::log(1.0 / z));
  }
  return cfg.a5 * std::sqrt(cfg.sigma_op) / denominator * (stochastic + contamination);
}

struct AdaptiveResult {
  Vector estimate;
  double selected_epsilon = 0.0;
  int selected_level = 0;  // 1-based
  std::vector<double> grid;
  std::vector<double> radii;
  std::vector<EstimateReport> per_level;
};

/// Largest l such that the first l balls have a common point. Nested prefix
/// intersections only shrink, so the scan stops at the first empty one.
inline int select_level(const std::vector<Vector>& centers, const std::vector<double>& radii) {
  require(!centers.empty(), ErrorCode::EmptyGrid, "no balls to intersect");
  int selected = 1;
  for (std::size_t l = 2; l <= centers.size(); ++l) {
    const std::vector<Vector> c(centers.begin(), centers.begin() + static_cast<std::ptrdiff_t>(l));
    const std::vector<double> r(radii.begin(), radii.begin() + static_cast<std::ptrdiff_t>(l));
    const double min_radius = *std::min_element(r.begin(), r.end());
    if (!balls_intersection_point(c, r, 1e-6 * min_radius)) break;
    selected = static_cast<int>(l);
  }
  return selected;
}

inline AdaptiveResult adaptive_ir_mean(const Dataset& data, const LepskiConfig& cfg) {
  cfg.validate();
  AdaptiveResult out;
  out.grid = epsilon_grid(cfg.a, data.p(), data.n());
  require(!out.grid.empty(), ErrorCode::EmptyGrid, "grid is empty (p too close to n)");
  const int l_max = static_cast<int>(out.grid.size());

  std::vector<Vector> centers;
  for (double eps : out.grid) {
    IRConfig ir;
    ir.epsilon = eps;
    ir.cov = cfg.cov;
    ir.solver = cfg.solver;
    out.per_level.push_back(ir_mean(data, ir));
    centers.push_back(out.per_level.back().estimate);
    out.radii.push_back(lepski_radius(eps, cfg, data.p(), data.n(), l_max));
  }
  out.selected_level = select_level(centers, out.radii);
  const auto index = static_cast<std::size_t>(out.selected_level - 1);
  out.estimate = centers[index];
  out.selected_epsilon = out.grid[index];
  return out;
}

/// Sets A5 so that R(0) equals the (1 - delta) empirical quantile of the
/// sample-mean error on outlier-free N(0, sigma) draws of size n.
inline double calibrate_a5(Index n, const SymMatrix& sigma, double a, double delta,
                           const std::vector<std::uint64_t>& seeds) {
  require(!seeds.empty(), ErrorCode::InvalidParams, "calibration needs seeds");
  const Index p = sigma.dim();
  std::vector<double> errors;
  const Vector zero = Vector::Zero(p);
  for (std::uint64_t seed : seeds) {
    const ContaminatedSample sample = sample_gac(n, p, zero, sigma, ContaminationSpec{}, seed);
    errors.push_back(baseline_sample_mean(sample.data).norm());
  }
  std::sort(errors.begin(), errors.end());
  const double quantile = sorted_quantile(errors, 1.0 - delta);

  LepskiConfig unit;
  unit.a = a;
  unit.delta = delta;
  unit.a5 = 1.0;
  unit.sigma_op = operator_norm_psd(sigma);
  const int l_max = std::max(1, grid_length(a, p, n));
  return quantile / lepski_radius(0.0, unit, p, n, l_max);
}

}  // namespace irmean
