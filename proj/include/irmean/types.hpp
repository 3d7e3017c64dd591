// Shared vocabulary of the iteratively reweighted mean library: datasets,
// weight vectors on the (capped) probability simplex, covariance
// declarations, contaminated samples and estimate reports.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace irmean {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

enum class ErrorCode {
  EmptyVector,
  NegativeWeight,
  SumNotOne,
  CapViolated,
  InvalidData,
  DimensionMismatch,
  NotSymmetric,
  NotPositiveSemidefinite,
  NoConvergence,
  InfeasibleCap,
  ZeroMassSubset,
  UnsupportedForUnknownCovariance,
  EpsilonOutOfRange,
  ZeroMatrix,
  InvalidRatio,
  ZOutOfRange,
  EmptyGrid,
  NoInliers,
  InvalidParams,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyVector: return "EmptyVector";
    case ErrorCode::NegativeWeight: return "NegativeWeight";
    case ErrorCode::SumNotOne: return "SumNotOne";
    case ErrorCode::CapViolated: return "CapViolated";
    case ErrorCode::InvalidData: return "InvalidData";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::NotPositiveSemidefinite: return "NotPositiveSemidefinite";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::InfeasibleCap: return "InfeasibleCap";
    case ErrorCode::ZeroMassSubset: return "ZeroMassSubset";
    case ErrorCode::UnsupportedForUnknownCovariance: return "UnsupportedForUnknownCovariance";
    case ErrorCode::EpsilonOutOfRange: return "EpsilonOutOfRange";
    case ErrorCode::ZeroMatrix: return "ZeroMatrix";
    case ErrorCode::InvalidRatio: return "InvalidRatio";
    case ErrorCode::ZOutOfRange: return "ZOutOfRange";
    case ErrorCode::EmptyGrid: return "EmptyGrid";
    case ErrorCode::NoInliers: return "NoInliers";
    case ErrorCode::InvalidParams: return "InvalidParams";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool condition, ErrorCode code, const std::string& what) {
  if (!condition) throw Error(code, what);
}

/// n x p point cloud, one observation per row. Entries are finite.
class Dataset {
 public:
  explicit Dataset(Matrix points) : points_(std::move(points)) {
    require(points_.rows() >= 1 && points_.cols() >= 1, ErrorCode::InvalidData,
            "dataset needs at least one row and one column");
    require(points_.allFinite(), ErrorCode::InvalidData, "dataset contains NaN or Inf");
  }

  const Matrix& points() const noexcept { return points_; }
  Index n() const noexcept { return points_.rows(); }
  Index p() const noexcept { return points_.cols(); }
  auto row(Index i) const { return points_.row(i); }

 private:
  Matrix points_;
};

// Construction-time tolerances. Arithmetic downstream renormalizes explicitly.
inline constexpr double kWeightSumTolerance = 1e-9;
inline constexpr double kCapTolerance = 1e-12;

/// A point of the probability simplex, optionally with a per-coordinate cap.
class WeightVector {
 public:
  WeightVector(Vector weights, std::optional<double> cap = std::nullopt)
      : weights_(std::move(weights)), cap_(cap) {
    require(weights_.size() >= 1, ErrorCode::EmptyVector, "weight vector is empty");
    if (cap_) {
      require(*cap_ > 0.0 && *cap_ <= 1.0 + kCapTolerance, ErrorCode::CapViolated,
              "cap must lie in (0, 1]");
    }
    for (Index i = 0; i < weights_.size(); ++i) {
      require(std::isfinite(weights_[i]), ErrorCode::NegativeWeight, "non-finite weight");
      require(weights_[i] >= 0.0, ErrorCode::NegativeWeight,
              "weight " + std::to_string(i) + " is negative");
    }
    const double total = weights_.sum();
    require(std::abs(total - 1.0) <= kWeightSumTolerance, ErrorCode::SumNotOne,
            "weights sum to " + std::to_string(total));
    if (cap_) {
      require(weights_.maxCoeff() <= *cap_ + kCapTolerance, ErrorCode::CapViolated,
              "max weight exceeds cap " + std::to_string(*cap_));
    }
  }

  static WeightVector uniform(Index n, std::optional<double> cap = std::nullopt) {
    require(n >= 1, ErrorCode::EmptyVector, "uniform weights need n >= 1");
    return WeightVector(Vector::Constant(n, 1.0 / static_cast<double>(n)), cap);
  }

  /// Uniform weights on the index subset J.
  static WeightVector uniform_on(Index n, const std::vector<Index>& subset,
                                 std::optional<double> cap = std::nullopt) {
    require(!subset.empty(), ErrorCode::EmptyVector, "subset is empty");
    Vector w = Vector::Zero(n);
    for (Index i : subset) {
      require(i >= 0 && i < n, ErrorCode::DimensionMismatch, "subset index out of range");
      w[i] = 1.0 / static_cast<double>(subset.size());
    }
    return WeightVector(std::move(w), cap);
  }

  const Vector& values() const noexcept { return weights_; }
  const std::optional<double>& cap() const noexcept { return cap_; }
  Index size() const noexcept { return weights_.size(); }
  double operator[](Index i) const { return weights_[i]; }

 private:
  Vector weights_;
  std::optional<double> cap_;
};

inline WeightVector validate_weight_vector(const std::vector<double>& raw,
                                           std::optional<double> cap = std::nullopt) {
  require(!raw.empty(), ErrorCode::EmptyVector, "weight vector is empty");
  return WeightVector(Eigen::Map<const Vector>(raw.data(), static_cast<Index>(raw.size())), cap);
}

// n*eps is rarely an integer in floating point even when it "should" be.
inline constexpr double kCountSlack = 1e-9;

/// floor(n*eps), robust to representation error.
inline Index trimmed_count_floor(Index n, double epsilon) {
  return static_cast<Index>(std::floor(static_cast<double>(n) * epsilon + kCountSlack));
}

/// ceil(n*eps): the outlier budget.
inline Index outlier_budget(Index n, double epsilon) {
  const double x = static_cast<double>(n) * epsilon - kCountSlack;
  return x <= 0.0 ? Index{0} : static_cast<Index>(std::ceil(x));
}

/// Cap of the feasible set W_n(eps): 1 / (n - floor(n*eps)).
inline double feasible_cap(Index n, double epsilon) {
  require(n >= 1, ErrorCode::InvalidData, "n must be positive");
  require(epsilon >= 0.0 && epsilon < 0.5, ErrorCode::EpsilonOutOfRange,
          "epsilon must lie in [0, 1/2)");
  return 1.0 / static_cast<double>(n - trimmed_count_floor(n, epsilon));
}

inline constexpr double kSymmetryTolerance = 1e-10;

/// p x p real symmetric matrix (symmetric within 1e-10 relative).
class SymMatrix {
 public:
  explicit SymMatrix(Matrix entries) : m_(std::move(entries)) {
    require(m_.rows() == m_.cols() && m_.rows() >= 1, ErrorCode::DimensionMismatch,
            "symmetric matrix must be square and non-empty");
    require(m_.allFinite(), ErrorCode::InvalidData, "matrix contains NaN or Inf");
    const double scale = std::max(1.0, m_.cwiseAbs().maxCoeff());
    require((m_ - m_.transpose()).cwiseAbs().maxCoeff() <= kSymmetryTolerance * scale,
            ErrorCode::NotSymmetric, "matrix is not symmetric");
    m_ = 0.5 * (m_ + m_.transpose()).eval();
  }

  static SymMatrix identity(Index p) { return SymMatrix(Matrix::Identity(p, p)); }
  static SymMatrix zero(Index p) { return SymMatrix(Matrix::Zero(p, p)); }

  const Matrix& matrix() const noexcept { return m_; }
  Index dim() const noexcept { return m_.rows(); }
  double operator()(Index i, Index j) const { return m_(i, j); }

 private:
  Matrix m_;
};

/// Known covariance, or one of the two unknown-covariance variants.
class CovarianceSpec {
 public:
  enum class Kind { Known, UnknownIsotropic, UnknownArbitrary };

  static CovarianceSpec known(SymMatrix sigma);  // defined in linalg.hpp (needs eigenvalues)
  static CovarianceSpec unknown_isotropic() { return CovarianceSpec(Kind::UnknownIsotropic); }
  static CovarianceSpec unknown_arbitrary() { return CovarianceSpec(Kind::UnknownArbitrary); }

  Kind kind() const noexcept { return kind_; }
  bool is_known() const noexcept { return kind_ == Kind::Known; }
  const SymMatrix& sigma() const {
    require(sigma_.has_value(), ErrorCode::UnsupportedForUnknownCovariance,
            "covariance is not known");
    return *sigma_;
  }

 private:
  explicit CovarianceSpec(Kind kind, std::optional<SymMatrix> sigma = std::nullopt)
      : kind_(kind), sigma_(std::move(sigma)) {}

  Kind kind_;
  std::optional<SymMatrix> sigma_;
};

inline const char* to_string(CovarianceSpec::Kind kind) {
  switch (kind) {
    case CovarianceSpec::Kind::Known: return "known";
    case CovarianceSpec::Kind::UnknownIsotropic: return "isotropic";
    case CovarianceSpec::Kind::UnknownArbitrary: return "arbitrary";
  }
  return "unknown";
}

/// Dataset plus ground truth, for simulations and oracle evaluation.
struct ContaminatedSample {
  Dataset data;
  std::vector<bool> inlier_mask;  // true = inlier
  Vector true_mean;
  double epsilon_actual = 0.0;    // |O| / n

  Index outlier_count() const {
    Index count = 0;
    for (bool inlier : inlier_mask) count += inlier ? 0 : 1;
    return count;
  }
};

struct IterationRecord {
  double objective_value = 0.0;
  WeightVector weights;
  Vector estimate;
  double solver_gap = 0.0;
  int solver_steps = 0;
  bool solver_budget_exhausted = false;
};

struct EstimateReport {
  Vector estimate;
  Vector initial_estimate;
  int iterations_run = 0;
  int k_budget = 0;
  std::vector<IterationRecord> trace;
  bool stopped_early = false;
  bool initial_estimate_converged = true;
  bool any_budget_exhausted = false;
};

}  // namespace irmean
