// Geometric primitives: geometric median (smoothed Weiszfeld), Euclidean
// projection onto the capped simplex, and a feasibility search for the
// intersection of Euclidean balls.
#pragma once

#include "irmean/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

namespace irmean {

struct GeometricMedianResult {
  Vector point;
  int iterations = 0;
  bool converged = false;
  std::vector<double> objective_trace;  // smoothed objective, one entry per iterate
};

/// sum_i ||X_i - mu||_2
inline double geometric_median_objective(const Dataset& data, const Vector& mu) {
  return (data.points().rowwise() - mu.transpose()).rowwise().norm().sum();
}

/// Minimizer of sum_i ||X_i - mu||_2.
///
/// Weiszfeld iterations on the smoothed objective sum_i sqrt(||X_i - mu||^2 + eta^2)
/// with eta = 1e-10 times a bound on the data diameter, started from the
/// sample mean. Each step is a majorize-minimize step, so the smoothed
/// objective never increases. Stops once ||grad|| * max_i ||X_i - mu|| falls
/// below tol * F(mu), which bounds the suboptimality since the minimizer
/// lies in the convex hull of the data.
inline GeometricMedianResult geometric_median(const Dataset& data, double tol = 1e-10,
                                              int max_iter = 2000) {
  const Matrix& x = data.points();
  const Index n = data.n();
  GeometricMedianResult out;
  Vector mu = x.colwise().mean().transpose();

  const double radius = (x.rowwise() - mu.transpose()).rowwise().norm().maxCoeff();
  if (radius == 0.0 || n == 1) {
    out.point = mu;
    out.converged = true;
    out.objective_trace.push_back(0.0);
    return out;
  }
  const double eta = 1e-10 * 2.0 * radius;
  const double eta2 = eta * eta;

  auto smoothed = [&](const Vector& m, Vector& inv_dist) {
    const Vector d2 = (x.rowwise() - m.transpose()).rowwise().squaredNorm();
    inv_dist = (d2.array() + eta2).sqrt().inverse().matrix();
    return (d2.array() + eta2).sqrt().sum();
  };

  Vector inv_dist(n);
  double f = smoothed(mu, inv_dist);
  out.objective_trace.push_back(f);
  for (int it = 1; it <= max_iter; ++it) {
    const Vector grad = (mu.transpose() * inv_dist.sum() - inv_dist.transpose() * x).transpose();
    const double spread = (x.rowwise() - mu.transpose()).rowwise().norm().maxCoeff();
    if (grad.norm() * spread <= tol * f) {
      out.converged = true;
      break;
    }
    Vector next = (x.transpose() * inv_dist) / inv_dist.sum();
    Vector next_inv(n);
    const double f_next = smoothed(next, next_inv);
    out.iterations = it;
    if (f_next > f) {
      // Only rounding can get here; keep the better iterate and stop.
      out.converged = true;
      break;
    }
    mu = std::move(next);
    inv_dist = std::move(next_inv);
    f = f_next;
    out.objective_trace.push_back(f);
  }
  out.point = mu;
  return out;
}

namespace detail {

inline double clamped_sum(const Vector& v, double theta, double cap) {
  return (v.array() - theta).max(0.0).min(cap).sum();
}

}  // namespace detail

/// Euclidean projection of v onto {w : sum w = 1, 0 <= w_i <= cap}.
///
/// The solution has the form w_i = clamp(v_i - theta, 0, cap). theta is
/// bracketed and bisected, then recomputed exactly from the free set.
inline WeightVector project_capped_simplex(const Vector& v, double cap) {
  const Index n = v.size();
  require(n >= 1, ErrorCode::EmptyVector, "cannot project an empty vector");
  require(cap > 0.0 && cap <= 1.0 && cap * static_cast<double>(n) >= 1.0 - 1e-12,
          ErrorCode::InfeasibleCap, "cap * n must be at least 1");
  require(v.allFinite(), ErrorCode::InvalidData, "vector contains NaN or Inf");

  if (cap * static_cast<double>(n) <= 1.0 + 1e-12) {
    return WeightVector(Vector::Constant(n, 1.0 / static_cast<double>(n)), cap);
  }

  double lo = v.minCoeff() - cap;  // sum = n * cap >= 1
  double hi = v.maxCoeff();        // sum = 0
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (detail::clamped_sum(v, mid, cap) >= 1.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  double theta = 0.5 * (lo + hi);

  // Exact theta on the free set identified by the bisection.
  double free_sum = 0.0;
  Index free_count = 0;
  Index upper_count = 0;
  for (Index i = 0; i < n; ++i) {
    const double shifted = v[i] - theta;
    if (shifted >= cap) {
      ++upper_count;
    } else if (shifted > 0.0) {
      free_sum += v[i];
      ++free_count;
    }
  }
  if (free_count > 0) {
    const double exact = (free_sum + cap * static_cast<double>(upper_count) - 1.0) /
                         static_cast<double>(free_count);
    bool consistent = true;
    for (Index i = 0; i < n && consistent; ++i) {
      const double before = v[i] - theta;
      const double after = v[i] - exact;
      const bool was_free = before > 0.0 && before < cap;
      if (was_free && (after < 0.0 || after > cap)) consistent = false;
    }
    if (consistent) theta = exact;
  }

  Vector w = (v.array() - theta).max(0.0).min(cap).matrix();
  const double total = w.sum();
  if (std::abs(total - 1.0) > 1e-14 && free_count > 0) {
    // Spread residual mass over the free coordinates (at most a few ulps).
    const double fix = (1.0 - total) / static_cast<double>(free_count);
    for (Index i = 0; i < n; ++i) {
      if (w[i] > 0.0 && w[i] < cap) w[i] = std::clamp(w[i] + fix, 0.0, cap);
    }
  }
  return WeightVector(std::move(w), cap);
}

/// Minimizes phi(x) = max_j (||x - c_j|| - r_j) by Polyak subgradient steps
/// (target value 0) from the centroid. Returns a point with phi <= tol, or
/// nothing when the search budget ends above tol.
inline std::optional<Vector> balls_intersection_point(const std::vector<Vector>& centers,
                                                      const std::vector<double>& radii,
                                                      std::optional<double> tol = std::nullopt,
                                                      int max_steps = 5000) {
  require(!centers.empty(), ErrorCode::InvalidParams, "need at least one ball");
  require(centers.size() == radii.size(), ErrorCode::DimensionMismatch,
          "centers and radii differ in length");
  const Index p = centers.front().size();
  double max_radius = 0.0;
  for (std::size_t j = 0; j < centers.size(); ++j) {
    require(centers[j].size() == p, ErrorCode::DimensionMismatch, "center dimension mismatch");
    require(radii[j] >= 0.0 && std::isfinite(radii[j]), ErrorCode::InvalidParams,
            "radii must be finite and nonnegative");
    max_radius = std::max(max_radius, radii[j]);
  }
  const double threshold = tol.value_or(1e-7 * max_radius);
  if (centers.size() == 1) return centers.front();

  Vector x = Vector::Zero(p);
  for (const Vector& c : centers) x += c;
  x /= static_cast<double>(centers.size());

  for (int step = 0; step <= max_steps; ++step) {
    double phi = -std::numeric_limits<double>::infinity();
    std::size_t worst = 0;
    for (std::size_t j = 0; j < centers.size(); ++j) {
      const double value = (x - centers[j]).norm() - radii[j];
      if (value > phi) {
        phi = value;
        worst = j;
      }
    }
    if (phi <= threshold) return x;
    const Vector direction = x - centers[worst];
    const double dist = direction.norm();
    if (dist == 0.0) break;  // phi = -r_worst <= 0 <= threshold would have returned
    // Unit subgradient; the Polyak step with target 0 moves exactly phi.
    x -= (phi / dist) * direction;
  }
  return std::nullopt;
}

}  // namespace irmean
