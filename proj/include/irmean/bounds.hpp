// Deterministic error bound for a weighted mean when the inlier set and the
// inlier noise are known. Used as a runtime check in simulations.
#pragma once

#include "irmean/linalg.hpp"
#include "irmean/types.hpp"
#include "irmean/weights.hpp"

#include <cmath>

namespace irmean {

struct ErrorBound {
  double error = 0.0;        // ||weighted mean - mu*||
  double epsilon_w = 0.0;    // outlier mass of w
  double spectral_term = 0.0;
  double remainder = 0.0;

  double bound() const { return spectral_term + remainder; }
  bool holds(double slack) const { return error <= bound() + slack; }
};

/// Evaluates, for the inlier set I of the sample and zeta_i = X_i - mu*,
///
///   ||X_w - mu*|| <= sqrt(e)/(1 - e) lambda_max,+^{1/2}(scatter(w, X_w) - Sigma)
///                    + 2 sqrt(||Sigma||) e
///                    + sqrt(2e) lambda_max,+^{1/2}(sum_I (w|I)_i (Sigma - zeta_i zeta_i^T))
///                    + (1 + sqrt(2e)) ||sum_I (w|I)_i zeta_i||
///
/// with e the outlier mass of w. Requires e <= 1/2.
inline ErrorBound deterministic_error_bound(const ContaminatedSample& sample, const WeightVector& w,
                                            const SymMatrix& sigma, double eig_tol = kDefaultEigTol) {
  const Dataset& data = sample.data;
  require(w.size() == data.n(), ErrorCode::DimensionMismatch, "weights length != n");
  require(static_cast<Index>(sample.inlier_mask.size()) == data.n(), ErrorCode::DimensionMismatch,
          "mask length != n");
  require(sigma.dim() == data.p(), ErrorCode::DimensionMismatch, "sigma dimension != p");

  ErrorBound out;
  for (Index i = 0; i < data.n(); ++i) {
    if (!sample.inlier_mask[static_cast<std::size_t>(i)]) out.epsilon_w += w[i];
  }
  require(out.epsilon_w <= 0.5, ErrorCode::InvalidParams, "outlier mass exceeds 1/2");
  const double e = out.epsilon_w;

  const Vector mean_w = weighted_mean(data, w);
  out.error = (mean_w - sample.true_mean).norm();

  auto sqrt_lambda_plus = [&](const Matrix& m) {
    const double top = top_eigenpair(SymMatrix(m), eig_tol).lambda;
    return std::sqrt(std::max(top, 0.0));
  };

  const SymMatrix scatter = weighted_scatter(data, w, mean_w);
  out.spectral_term =
      std::sqrt(e) / (1.0 - e) * sqrt_lambda_plus(scatter.matrix() - sigma.matrix());

  const WeightVector conditional = conditional_weights(w, mask_to_indices(sample.inlier_mask));
  Matrix noise_moment = Matrix::Zero(data.p(), data.p());
  Vector noise_mean = Vector::Zero(data.p());
  for (Index i = 0; i < data.n(); ++i) {
    const double wi = conditional[i];
    if (wi == 0.0) continue;
    const Vector zeta = data.row(i).transpose() - sample.true_mean;
    noise_moment.noalias() += wi * zeta * zeta.transpose();
    noise_mean += wi * zeta;
  }
  const double sigma_op = operator_norm_psd(sigma);
  out.remainder = 2.0 * std::sqrt(sigma_op) * e +
                  std::sqrt(2.0 * e) * sqrt_lambda_plus(sigma.matrix() - noise_moment) +
                  (1.0 + std::sqrt(2.0 * e)) * noise_mean.norm();
  return out;
}

}  // namespace irmean
