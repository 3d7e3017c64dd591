// Reference implementations used only by the tests. They share no code with
// the library beyond the Eigen containers.
#pragma once

#include <array>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <utility>
#include <vector>

namespace oracle {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct Eig {
  Vec values;   // ascending
  Mat vectors;  // columns
};

/// Cyclic Jacobi rotations until the off-diagonal mass vanishes.
inline Eig jacobi(Mat a) {
  const Eigen::Index p = a.rows();
  Mat v = Mat::Identity(p, p);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index i = 0; i < p; ++i)
      for (Eigen::Index j = i + 1; j < p; ++j) off += a(i, j) * a(i, j);
    if (off < 1e-30 * std::max(1.0, a.squaredNorm())) break;
    for (Eigen::Index i = 0; i < p; ++i) {
      for (Eigen::Index j = i + 1; j < p; ++j) {
        if (a(i, j) == 0.0) continue;
        const double tau = (a(j, j) - a(i, i)) / (2.0 * a(i, j));
        const double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (Eigen::Index k = 0; k < p; ++k) {
          const double aki = a(k, i), akj = a(k, j);
          a(k, i) = c * aki - s * akj;
          a(k, j) = s * aki + c * akj;
        }
        for (Eigen::Index k = 0; k < p; ++k) {
          const double aik = a(i, k), ajk = a(j, k);
          a(i, k) = c * aik - s * ajk;
          a(j, k) = s * aik + c * ajk;
        }
        for (Eigen::Index k = 0; k < p; ++k) {
          const double vki = v(k, i), vkj = v(k, j);
          v(k, i) = c * vki - s * vkj;
          v(k, j) = s * vki + c * vkj;
        }
      }
    }
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(p));
  for (Eigen::Index i = 0; i < p; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](auto x, auto y) { return a(x, x) < a(y, y); });
  Eig out{Vec(p), Mat(p, p)};
  for (Eigen::Index k = 0; k < p; ++k) {
    out.values[k] = a(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(k)]);
    out.vectors.col(k) = v.col(order[static_cast<std::size_t>(k)]);
  }
  return out;
}

/// Largest eigenvalue of [[a, b], [b, c]].
inline double top_eig_2x2(double a, double b, double c) {
  return 0.5 * (a + c) + std::sqrt(0.25 * (a - c) * (a - c) + b * b);
}

/// sum_i w_i (x_i - mu)(x_i - mu)^T by explicit loops.
inline Mat scatter(const Mat& x, const Vec& w, const Vec& mu) {
  Mat s = Mat::Zero(x.cols(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index a = 0; a < x.cols(); ++a)
      for (Eigen::Index b = 0; b < x.cols(); ++b)
        s(a, b) += w[i] * (x(i, a) - mu[a]) * (x(i, b) - mu[b]);
  return s;
}

/// Projection onto {sum w = 1, 0 <= w <= cap} by enumerating every
/// (lower, free, upper) assignment and keeping the closest feasible point.
inline Vec project_capped_simplex(const Vec& v, double cap) {
  const int n = static_cast<int>(v.size());
  int patterns = 1;
  for (int i = 0; i < n; ++i) patterns *= 3;
  Vec best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (int code = 0; code < patterns; ++code) {
    std::vector<int> state(static_cast<std::size_t>(n));
    int rest = code, free_count = 0, upper = 0;
    double free_sum = 0.0;
    for (int i = 0; i < n; ++i) {
      state[static_cast<std::size_t>(i)] = rest % 3;
      rest /= 3;
      if (state[static_cast<std::size_t>(i)] == 1) {
        ++free_count;
        free_sum += v[i];
      } else if (state[static_cast<std::size_t>(i)] == 2) {
        ++upper;
      }
    }
    Vec w(n);
    if (free_count == 0) {
      if (std::abs(cap * upper - 1.0) > 1e-12) continue;
      for (int i = 0; i < n; ++i) w[i] = state[static_cast<std::size_t>(i)] == 2 ? cap : 0.0;
    } else {
      const double theta = (free_sum + cap * upper - 1.0) / free_count;
      for (int i = 0; i < n; ++i) {
        const int s = state[static_cast<std::size_t>(i)];
        w[i] = s == 0 ? 0.0 : (s == 2 ? cap : v[i] - theta);
      }
    }
    if (w.minCoeff() < -1e-13 || w.maxCoeff() > cap + 1e-13) continue;
    const double dist = (w - v).squaredNorm();
    if (dist < best_dist) {
      best_dist = dist;
      best = w;
    }
  }
  return best;
}

/// G(w) = lambda_max,+(scatter(w, mu) - sigma) for p = 2, closed form.
inline double objective_2d(const Mat& x, const Vec& w, const Vec& mu, const Mat& sigma) {
  const Mat m = scatter(x, w, mu) - sigma;
  return std::max(0.0, top_eig_2x2(m(0, 0), m(0, 1), m(1, 1)));
}

/// Minimum of f over {w : sum w = 1, 0 <= w <= cap} in R^4, where 1/cap is
/// an integer. The lattice step is cap/m with m = ceil(cap / 1e-2), so every
/// vertex of the capped simplex is a grid point; a 10x finer lattice is then
/// scanned within two coarse steps of the coarse winner.
inline double grid_minimum_4(const std::function<double(const Vec&)>& f, double cap,
                             Vec* argmin = nullptr) {
  const long inv_cap = std::lround(1.0 / cap);
  double best = std::numeric_limits<double>::infinity();
  std::array<long, 4> best_k{};
  auto scan = [&](long m, const std::array<long, 4>& lo, const std::array<long, 4>& hi) {
    const long total = inv_cap * m;  // sum of counts, each in [0, m]
    Vec w(4);
    std::array<long, 4> k{};
    for (k[0] = lo[0]; k[0] <= hi[0]; ++k[0]) {
      for (k[1] = lo[1]; k[1] <= hi[1]; ++k[1]) {
        for (k[2] = lo[2]; k[2] <= hi[2]; ++k[2]) {
          k[3] = total - k[0] - k[1] - k[2];
          if (k[3] < lo[3] || k[3] > hi[3]) continue;
          for (int i = 0; i < 4; ++i) w[i] = static_cast<double>(k[i]) / static_cast<double>(total);
          const double value = f(w);
          if (value < best) {
            best = value;
            best_k = k;
            if (argmin) *argmin = w;
          }
        }
      }
    }
  };
  const long m = static_cast<long>(std::ceil(cap / 1e-2 - 1e-9));
  scan(m, {0, 0, 0, 0}, {m, m, m, m});
  std::array<long, 4> lo{}, hi{};
  for (int i = 0; i < 4; ++i) {
    lo[i] = std::max(0L, 10 * (best_k[i] - 2));
    hi[i] = std::min(10 * m, 10 * (best_k[i] + 2));
  }
  scan(10 * m, lo, hi);
  return best;
}

inline Mat random_matrix(std::mt19937_64& gen, Eigen::Index rows, Eigen::Index cols,
                         double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = normal(gen);
  return m;
}

inline Mat random_spd(std::mt19937_64& gen, Eigen::Index p) {
  const Mat a = random_matrix(gen, p, p);
  return a * a.transpose() + 0.1 * Mat::Identity(p, p);
}

inline Mat random_orthogonal(std::mt19937_64& gen, Eigen::Index p) {
  return jacobi(random_spd(gen, p)).vectors;
}

/// Point of the simplex, uniformly distributed.
inline Vec random_simplex(std::mt19937_64& gen, Eigen::Index n) {
  std::exponential_distribution<double> expo(1.0);
  Vec w(n);
  for (Eigen::Index i = 0; i < n; ++i) w[i] = expo(gen);
  return w / w.sum();
}

/// Two-dimensional minimizer of sum_i ||x_i - mu|| by compass search.
inline Vec geometric_median_2d(const Mat& x) {
  auto f = [&](const Vec& m) { return (x.rowwise() - m.transpose()).rowwise().norm().sum(); };
  Vec mu = x.colwise().mean().transpose();
  double step = (x.rowwise() - mu.transpose()).rowwise().norm().maxCoeff();
  double value = f(mu);
  const double dirs[8][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1},
                             {0.7071067811865476, 0.7071067811865476},
                             {-0.7071067811865476, 0.7071067811865476},
                             {0.7071067811865476, -0.7071067811865476},
                             {-0.7071067811865476, -0.7071067811865476}};
  while (step > 1e-13) {
    bool moved = false;
    for (const auto& d : dirs) {
      Vec trial = mu;
      trial[0] += step * d[0];
      trial[1] += step * d[1];
      const double t = f(trial);
      if (t < value) {
        value = t;
        mu = trial;
        moved = true;
      }
    }
    if (!moved) step *= 0.5;
  }
  return mu;
}

}  // namespace oracle
