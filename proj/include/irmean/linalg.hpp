// Dense symmetric kernels: weighted scatter matrices and extreme eigenpairs.
#pragma once

#include "irmean/types.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace irmean {

/// sum_i w_i (X_i - mu)(X_i - mu)^T
inline SymMatrix weighted_scatter(const Dataset& data, const WeightVector& w, const Vector& mu) {
  require(w.size() == data.n(), ErrorCode::DimensionMismatch, "weights length != n");
  require(mu.size() == data.p(), ErrorCode::DimensionMismatch, "mu length != p");
  // Rows scaled by sqrt(w_i); the scatter is then a plain Gram product.
  Matrix centered = data.points().rowwise() - mu.transpose();
  centered.array().colwise() *= w.values().array().sqrt();
  Matrix s = Matrix::Zero(data.p(), data.p());
  s.selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose());
  s.triangularView<Eigen::StrictlyUpper>() = s.transpose();
  return SymMatrix(std::move(s));
}

struct EigenPair {
  double lambda = 0.0;
  Vector vector;
  bool converged = false;
  double residual = 0.0;  // ||S v - lambda v||
};

inline constexpr double kDefaultEigTol = 1e-9;

namespace detail {

// Full symmetric eigendecomposition; eigenvalues ascending.
inline Eigen::SelfAdjointEigenSolver<Matrix> decompose(const Matrix& s) {
  return Eigen::SelfAdjointEigenSolver<Matrix>(s, Eigen::ComputeEigenvectors);
}

inline EigenPair extreme_pair(const SymMatrix& sym, double tol, bool largest) {
  const Matrix& s = sym.matrix();
  const Index p = s.rows();
  const auto solver = decompose(s);
  EigenPair out;
  if (solver.info() != Eigen::Success) return out;
  const Index k = largest ? p - 1 : 0;
  out.lambda = solver.eigenvalues()[k];
  out.vector = solver.eigenvectors().col(k).normalized();
  out.residual = (s * out.vector - out.lambda * out.vector).norm();
  out.converged = out.residual <= tol * std::max(1.0, s.norm());
  return out;
}

}  // namespace detail

/// Largest eigenvalue of S with a unit eigenvector. converged is false when
/// the decomposition fails or the residual exceeds tol * max(1, ||S||_F).
/// With a repeated top eigenvalue any vector of the eigenspace may come back.
inline EigenPair top_eigenpair(const SymMatrix& s, double tol = kDefaultEigTol) {
  return detail::extreme_pair(s, tol, true);
}

/// Smallest eigenpair.
inline EigenPair bottom_eigenpair(const SymMatrix& s, double tol = kDefaultEigTol) {
  return detail::extreme_pair(s, tol, false);
}

/// max(lambda_max(S), 0). Throws NoConvergence when the eigenpair fails its
/// residual check.
inline double lambda_max_plus(const SymMatrix& s, double tol = kDefaultEigTol) {
  const EigenPair top = top_eigenpair(s, tol);
  require(top.converged, ErrorCode::NoConvergence, "eigensolver did not converge");
  return std::max(top.lambda, 0.0);
}

inline CovarianceSpec CovarianceSpec::known(SymMatrix sigma) {
  const EigenPair bottom = bottom_eigenpair(sigma);
  const double scale = std::max(1.0, sigma.matrix().norm());
  require(bottom.lambda >= -1e-10 * scale, ErrorCode::NotPositiveSemidefinite,
          "covariance has a negative eigenvalue");
  return CovarianceSpec(Kind::Known, std::move(sigma));
}

/// Operator norm of a PSD matrix.
inline double operator_norm_psd(const SymMatrix& s) {
  return std::max(0.0, top_eigenpair(s).lambda);
}

}  // namespace irmean
