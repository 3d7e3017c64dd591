// The iteratively reweighted mean: geometric-median start, K reweighting
// steps, each a weight optimization followed by a weighted average.
#pragma once

#include "irmean/geometry.hpp"
#include "irmean/linalg.hpp"
#include "irmean/types.hpp"
#include "irmean/weights.hpp"

#include <climits>
#include <cmath>
#include <optional>

namespace irmean {

struct IRConfig {
  double epsilon = 0.0;
  CovarianceSpec cov = CovarianceSpec::unknown_isotropic();
  SolverConfig solver{};
  bool use_early_stop = false;
  std::optional<int> k_override;

  void validate() const {
    require(epsilon >= 0.0 && epsilon < 0.5, ErrorCode::EpsilonOutOfRange,
            "epsilon must lie in [0, 1/2)");
    require(!k_override || *k_override >= 0, ErrorCode::InvalidParams,
            "k_override must be nonnegative");
    solver.validate();
  }
};

/// Contraction factor sqrt(eps (1 - eps)) / (1 - 2 eps).
inline double alpha(double epsilon) {
  require(epsilon >= 0.0 && epsilon < 0.5, ErrorCode::EpsilonOutOfRange,
          "epsilon must lie in [0, 1/2)");
  return std::sqrt(epsilon * (1.0 - epsilon)) / (1.0 - 2.0 * epsilon);
}

/// (5 - sqrt 5) / 10, the root of alpha(eps) = 1 in [0, 1/2).
inline double breakdown_threshold() { return (5.0 - std::sqrt(5.0)) / 10.0; }

/// Tr(Sigma) / ||Sigma||_op
inline double effective_rank(const SymMatrix& sigma) {
  const double top = operator_norm_psd(sigma);
  require(top > 0.0, ErrorCode::ZeroMatrix, "effective rank of a zero matrix");
  return sigma.matrix().trace() / top;
}

/// Number of reweighting steps for a geometric-median start:
/// K = max(0, ceil((log 4r - 2 log(eps (1 - 2 eps))) / (2 log(1 - 2 eps) - log eps - log(1 - eps)))).
/// Zero once eps reaches the breakdown threshold.
inline int iteration_count(double epsilon, double r) {
  require(epsilon > 0.0 && epsilon < 0.5, ErrorCode::EpsilonOutOfRange,
          "epsilon must lie in (0, 1/2)");
  require(r >= 1.0 && std::isfinite(r), ErrorCode::InvalidParams, "rank must be >= 1");
  if (epsilon >= breakdown_threshold()) return 0;
  const double numerator = std::log(4.0 * r) - 2.0 * std::log(epsilon * (1.0 - 2.0 * epsilon));
  const double denominator =
      2.0 * std::log(1.0 - 2.0 * epsilon) - std::log(epsilon) - std::log(1.0 - epsilon);
  const double k = std::ceil(numerator / denominator);
  if (!(k > 0.0)) return 0;
  return k >= static_cast<double>(INT_MAX) ? INT_MAX : static_cast<int>(k);
}

/// The rank that enters the iteration count: the effective rank for a known
/// covariance, the dimension otherwise.
inline double iteration_rank(const CovarianceSpec& cov, Index p) {
  if (!cov.is_known()) return static_cast<double>(p);
  return effective_rank(cov.sigma());
}

inline EstimateReport ir_mean(const Dataset& data, const IRConfig& cfg) {
  cfg.validate();
  require(data.n() >= 2, ErrorCode::InvalidData, "need at least two observations");
  if (cfg.cov.is_known()) {
    require(cfg.cov.sigma().dim() == data.p(), ErrorCode::DimensionMismatch,
            "sigma dimension != p");
  }

  EstimateReport report;
  const GeometricMedianResult start = geometric_median(data);
  report.initial_estimate = start.point;
  report.initial_estimate_converged = start.converged;
  report.estimate = start.point;

  if (cfg.k_override) {
    report.k_budget = *cfg.k_override;
  } else if (cfg.epsilon == 0.0) {
    // The feasible set is the uniform vector; one step yields the sample mean.
    report.k_budget = 1;
  } else {
    report.k_budget = iteration_count(cfg.epsilon, iteration_rank(cfg.cov, data.p()));
  }

  for (int k = 1; k <= report.k_budget; ++k) {
    WeightSolution sol = minimize_weights(data, report.estimate, cfg.cov, cfg.epsilon, cfg.solver);
    report.estimate = weighted_mean(data, sol.weights);
    report.any_budget_exhausted = report.any_budget_exhausted || sol.budget_exhausted;
    report.trace.push_back(IterationRecord{sol.objective, std::move(sol.weights), report.estimate,
                                           sol.gap, sol.steps, sol.budget_exhausted});
    report.iterations_run = k;
    if (cfg.use_early_stop && cfg.cov.is_known() &&
        stopping_certificate(data, report.trace.back().weights, cfg.cov, cfg.epsilon,
                             cfg.solver.eig_tol)) {
      report.stopped_early = k < report.k_budget;
      break;
    }
  }
  return report;
}

}  // namespace irmean
