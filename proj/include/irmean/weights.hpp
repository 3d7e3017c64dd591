// The reweighting objective G(w, mu), its subgradient in w, and the
// projected subgradient solver over the capped simplex W_n(eps).
#pragma once

#include "irmean/geometry.hpp"
#include "irmean/linalg.hpp"
#include "irmean/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

namespace irmean {

enum class StepRule {
  Diminishing,         // diameter / (||g|| sqrt(t))
  PolyakWithEstimate,  // (f - lower bound) / ||g||^2
};

struct SolverConfig {
  int max_steps = 500;
  StepRule step_rule = StepRule::Diminishing;
  /// Stop once the certified gap is below this. nullopt selects
  /// 0.1 (sqrt(p/n) + sqrt(eps)) times the covariance scale.
  std::optional<double> target_gap;
  double eig_tol = kDefaultEigTol;
  double step_scale = 1.0;

  void validate() const {
    require(max_steps >= 1, ErrorCode::InvalidParams, "max_steps must be >= 1");
    require(!target_gap || *target_gap >= 0.0, ErrorCode::InvalidParams,
            "target_gap must be >= 0");
    require(eig_tol > 0.0, ErrorCode::InvalidParams, "eig_tol must be positive");
    require(step_scale > 0.0, ErrorCode::InvalidParams, "step_scale must be positive");
  }
};

namespace detail {

// The matrix whose top eigenvalue defines G: scatter - Sigma for a known
// covariance, the bare scatter otherwise.
inline SymMatrix objective_matrix(const SymMatrix& scatter, const CovarianceSpec& cov) {
  if (!cov.is_known()) return scatter;
  require(cov.sigma().dim() == scatter.dim(), ErrorCode::DimensionMismatch,
          "sigma dimension != p");
  return SymMatrix(scatter.matrix() - cov.sigma().matrix());
}

// X - 1 mu^T, shared by every evaluation at a fixed mu.
inline Matrix centered_rows(const Dataset& data, const Vector& mu) {
  require(mu.size() == data.p(), ErrorCode::DimensionMismatch, "mu length != p");
  return data.points().rowwise() - mu.transpose();
}

inline Matrix scatter_from_centered(const Matrix& centered, const Vector& w) {
  Matrix scaled = centered;
  scaled.array().colwise() *= w.array().sqrt();
  Matrix s = Matrix::Zero(centered.cols(), centered.cols());
  s.selfadjointView<Eigen::Lower>().rankUpdate(scaled.transpose());
  s.triangularView<Eigen::StrictlyUpper>() = s.transpose();
  return s;
}

// min <g, u> over {u : sum u = 1, 0 <= u <= cap}: fill the smallest entries.
inline double linear_minimum_capped_simplex(const Vector& g, double cap) {
  std::vector<Index> order(static_cast<std::size_t>(g.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index a, Index b) { return g[a] < g[b]; });
  double mass = 1.0;
  double value = 0.0;
  for (Index i : order) {
    if (mass <= 0.0) break;
    const double take = std::min(cap, mass);
    value += take * g[i];
    mass -= take;
  }
  return value;
}

struct Evaluation {
  double lambda = 0.0;  // top eigenvalue of the objective matrix
  double value = 0.0;   // G
  Vector subgradient;
  Vector eigvec;
};

inline Evaluation evaluate(const Matrix& centered, const Vector& w, const CovarianceSpec& cov,
                           double eig_tol) {
  const SymMatrix scatter(scatter_from_centered(centered, w));
  const EigenPair top = top_eigenpair(objective_matrix(scatter, cov), eig_tol);
  Evaluation e;
  e.lambda = top.lambda;
  e.value = std::max(top.lambda, 0.0);
  e.eigvec = top.vector;
  if (cov.is_known() && top.lambda < 0.0) {
    e.subgradient = Vector::Zero(centered.rows());
  } else {
    e.subgradient = (centered * top.vector).array().square().matrix();
  }
  return e;
}

}  // namespace detail

/// G(w, mu): lambda_max,+(scatter - Sigma) for a known covariance,
/// lambda_max(scatter) for the unknown variants.
inline double objective_G(const Dataset& data, const WeightVector& w, const Vector& mu,
                          const CovarianceSpec& cov, double eig_tol = kDefaultEigTol) {
  require(w.size() == data.n(), ErrorCode::DimensionMismatch, "weights length != n");
  const Matrix centered = detail::centered_rows(data, mu);
  return detail::evaluate(centered, w.values(), cov, eig_tol).value;
}

/// g_i = (v^T (X_i - mu))^2 for a top eigenvector v; zero on the flat
/// region of lambda_max,+ (known covariance, negative top eigenvalue).
inline Vector subgradient_G(const Dataset& data, const WeightVector& w, const Vector& mu,
                            const CovarianceSpec& cov, double eig_tol = kDefaultEigTol) {
  require(w.size() == data.n(), ErrorCode::DimensionMismatch, "weights length != n");
  const Matrix centered = detail::centered_rows(data, mu);
  return detail::evaluate(centered, w.values(), cov, eig_tol).subgradient;
}

/// Default stopping gap: 0.1 (sqrt(p/n) + sqrt(eps)) times ||Sigma||_op for a
/// known covariance, times the current best objective otherwise.
inline double default_target_gap(Index n, Index p, double epsilon, double scale) {
  return 0.1 * (std::sqrt(static_cast<double>(p) / static_cast<double>(n)) + std::sqrt(epsilon)) *
         scale;
}

struct WeightSolution {
  WeightVector weights;
  double objective = 0.0;
  double gap = 0.0;  // objective - certified lower bound on the minimum
  int steps = 0;
  bool budget_exhausted = false;
};

/// Minimizes G(., mu) over W_n(eps) by projected subgradient descent from
/// the uniform vector, keeping the best iterate. The gap is certified by the
/// best linearization lower bound seen along the way.
inline WeightSolution minimize_weights(const Dataset& data, const Vector& mu,
                                       const CovarianceSpec& cov, double epsilon,
                                       const SolverConfig& cfg = {}) {
  cfg.validate();
  const Index n = data.n();
  require(n >= 2, ErrorCode::InvalidData, "need at least two observations");
  require(epsilon >= 0.0 && epsilon < 0.5, ErrorCode::EpsilonOutOfRange,
          "epsilon must lie in [0, 1/2)");
  if (cov.is_known()) {
    require(cov.sigma().dim() == data.p(), ErrorCode::DimensionMismatch, "sigma dimension != p");
  }

  const double cap = feasible_cap(n, epsilon);
  const Matrix centered = detail::centered_rows(data, mu);
  const Vector uniform = Vector::Constant(n, 1.0 / static_cast<double>(n));

  detail::Evaluation eval = detail::evaluate(centered, uniform, cov, cfg.eig_tol);
  WeightSolution best{WeightVector(uniform, cap), eval.value, 0.0, 0, false};

  const Index kept = n - trimmed_count_floor(n, epsilon);
  if (kept == n) return best;  // the feasible set is the uniform vector alone

  const double scale = cov.is_known() ? operator_norm_psd(cov.sigma()) : 0.0;
  // Exact diameter of the capped simplex: two uniform vectors on kept-subsets
  // overlapping in 2 kept - n indices.
  const double diameter =
      std::sqrt(2.0 * static_cast<double>(n - kept)) / static_cast<double>(kept);

  double lower = 0.0;  // G >= 0 always
  Vector w = uniform;
  for (int t = 1; t <= cfg.max_steps; ++t) {
    if (t > 1) eval = detail::evaluate(centered, w, cov, cfg.eig_tol);
    best.steps = t;
    if (eval.value < best.objective) {
      best.weights = WeightVector(w, cap);
      best.objective = eval.value;
    }
    if (eval.subgradient.isZero(0.0)) {
      lower = best.objective;  // flat at zero: globally optimal
    } else {
      const double linear_min = detail::linear_minimum_capped_simplex(eval.subgradient, cap);
      lower = std::max(lower, eval.lambda + linear_min - eval.subgradient.dot(w));
    }
    best.gap = std::max(0.0, best.objective - lower);
    const double target =
        cfg.target_gap.value_or(default_target_gap(n, data.p(), epsilon,
                                                   cov.is_known() ? scale : best.objective));
    if (best.gap <= target) {
      best.budget_exhausted = false;
      return best;
    }

    Vector direction = eval.subgradient.array() - eval.subgradient.mean();
    const double dnorm = direction.norm();
    if (dnorm == 0.0) break;
    double step = 0.0;
    switch (cfg.step_rule) {
      case StepRule::Diminishing:
        step = cfg.step_scale * diameter / (dnorm * std::sqrt(static_cast<double>(t)));
        break;
      case StepRule::PolyakWithEstimate:
        step = cfg.step_scale * (eval.value - lower) / (dnorm * dnorm);
        break;
    }
    w = project_capped_simplex(w - step * eval.subgradient, cap).values();
  }
  best.budget_exhausted = true;
  return best;
}

/// Conditional probability of w given the index subset.
inline WeightVector conditional_weights(const WeightVector& w, const std::vector<Index>& subset) {
  double mass = 0.0;
  for (Index i : subset) {
    require(i >= 0 && i < w.size(), ErrorCode::DimensionMismatch, "subset index out of range");
    mass += w[i];
  }
  require(mass > 0.0, ErrorCode::ZeroMassSubset, "subset carries no weight");
  Vector out = Vector::Zero(w.size());
  for (Index i : subset) out[i] = w[i] / mass;
  return WeightVector(std::move(out));
}

inline std::vector<Index> mask_to_indices(const std::vector<bool>& mask, bool value = true) {
  std::vector<Index> out;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i] == value) out.push_back(static_cast<Index>(i));
  }
  return out;
}

/// sum_i w_i X_i
inline Vector weighted_mean(const Dataset& data, const WeightVector& w) {
  require(w.size() == data.n(), ErrorCode::DimensionMismatch, "weights length != n");
  return data.points().transpose() * w.values();
}

/// Early-stop rule: lambda_max(scatter(w, weighted mean) - Sigma) <= eps.
inline bool stopping_certificate(const Dataset& data, const WeightVector& w,
                                 const CovarianceSpec& cov, double epsilon,
                                 double eig_tol = kDefaultEigTol) {
  require(cov.is_known(), ErrorCode::UnsupportedForUnknownCovariance,
          "the stopping rule needs a known covariance");
  const SymMatrix scatter = weighted_scatter(data, w, weighted_mean(data, w));
  const SymMatrix m = detail::objective_matrix(scatter, cov);
  const EigenPair top = top_eigenpair(m, eig_tol);
  // Roundoff slack, so exact ties such as lambda = epsilon = 0 still fire.
  return top.lambda <= epsilon + eig_tol * std::max(1.0, m.matrix().norm());
}

}  // namespace irmean
