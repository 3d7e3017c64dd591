// Contaminated data generators, baseline estimators, risk summaries and the
// three benchmark experiments (error decay along iterations, breakdown
// sweep, comparison with simple estimators).
#pragma once

#include "irmean/estimator.hpp"
#include "irmean/geometry.hpp"
#include "irmean/linalg.hpp"
#include "irmean/random.hpp"
#include "irmean/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace irmean {

enum class Scheme { None, SmallestEigenvector, UniformOutliers };

inline const char* to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::None: return "none";
    case Scheme::SmallestEigenvector: return "smallest_eigenvector";
    case Scheme::UniformOutliers: return "uniform";
  }
  return "unknown";
}

inline Scheme parse_scheme(const std::string& name) {
  if (name == "none") return Scheme::None;
  if (name == "smallest_eigenvector" || name == "eigenvector") return Scheme::SmallestEigenvector;
  if (name == "uniform") return Scheme::UniformOutliers;
  throw Error(ErrorCode::InvalidParams, "unknown contamination scheme '" + name + "'");
}

struct ContaminationSpec {
  Scheme scheme = Scheme::None;
  double epsilon = 0.0;
  double a = 0.0;  // uniform outlier range [a, b]
  double b = 0.0;

  void validate() const {
    require(epsilon >= 0.0 && epsilon < 0.5, ErrorCode::EpsilonOutOfRange,
            "contamination rate must lie in [0, 1/2)");
    require(scheme != Scheme::UniformOutliers || a <= b, ErrorCode::InvalidParams,
            "uniform outliers need a <= b");
  }
};

// Random stream ids within one seed.
inline constexpr std::uint32_t kNoiseStream = 0;
inline constexpr std::uint32_t kOutlierStream = 1;

namespace detail {

// A with A A^T = Sigma, from the pivoted LDL^T factorization (handles
// singular PSD matrices).
inline Matrix covariance_root(const SymMatrix& sigma) {
  const Eigen::LDLT<Matrix> ldlt(sigma.matrix());
  Matrix l = ldlt.matrixL();
  const Vector d = ldlt.vectorD().cwiseMax(0.0).cwiseSqrt();
  Matrix root = ldlt.transpositionsP().transpose() * (l * d.asDiagonal());
  return root;
}

inline void check_sampler_args(Index n, Index p, const Vector& mu_star, const SymMatrix& sigma,
                               const ContaminationSpec& spec) {
  require(n >= 1 && p >= 1, ErrorCode::InvalidParams, "n and p must be positive");
  require(mu_star.size() == p, ErrorCode::DimensionMismatch, "mu_star length != p");
  require(sigma.dim() == p, ErrorCode::DimensionMismatch, "sigma dimension != p");
  spec.validate();
}

// Sign-canonical: first coordinate that is not negligible is positive.
inline Vector canonical_sign(Vector v) {
  for (Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > 1e-12) {
      if (v[i] < 0.0) v = -v;
      break;
    }
  }
  return v;
}

// Replaces rows of y according to the scheme; returns the inlier mask.
inline std::vector<bool> contaminate(Matrix& y, const Vector& mu_star,
                                     const ContaminationSpec& spec, std::uint64_t seed) {
  const Index n = y.rows();
  const Index p = y.cols();
  std::vector<bool> mask(static_cast<std::size_t>(n), true);
  const Index count = spec.scheme == Scheme::None ? 0 : outlier_budget(n, spec.epsilon);
  if (count == 0) return mask;

  switch (spec.scheme) {
    case Scheme::None: break;
    case Scheme::SmallestEigenvector: {
      const Vector mean = y.colwise().mean().transpose();
      const Matrix centered = y.rowwise() - mean.transpose();
      const SymMatrix cov((centered.transpose() * centered) / static_cast<double>(n));
      const Vector v = canonical_sign(bottom_eigenpair(cov).vector);
      std::vector<double> score(static_cast<std::size_t>(n), 0.0);
      for (Index i = 0; i < n; ++i) {
        const double norm = centered.row(i).norm();
        score[static_cast<std::size_t>(i)] = norm > 0.0 ? std::abs(centered.row(i).dot(v)) / norm : 0.0;
      }
      std::vector<Index> order(static_cast<std::size_t>(n));
      std::iota(order.begin(), order.end(), Index{0});
      std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
        return score[static_cast<std::size_t>(a)] > score[static_cast<std::size_t>(b)];
      });
      const Vector outlier = mu_star + std::sqrt(static_cast<double>(p)) * v;
      for (Index k = 0; k < count; ++k) {
        const Index i = order[static_cast<std::size_t>(k)];
        y.row(i) = outlier.transpose();
        mask[static_cast<std::size_t>(i)] = false;
      }
      break;
    }
    case Scheme::UniformOutliers: {
      CounterRng rng(seed, kOutlierStream);
      for (Index i = n - count; i < n; ++i) {
        for (Index j = 0; j < p; ++j) y(i, j) += rng.uniform(spec.a, spec.b);
        mask[static_cast<std::size_t>(i)] = false;
      }
      break;
    }
  }
  return mask;
}

inline ContaminatedSample finish_sample(Matrix y, const Vector& mu_star,
                                        const ContaminationSpec& spec, std::uint64_t seed) {
  std::vector<bool> mask = contaminate(y, mu_star, spec, seed);
  const auto n = static_cast<double>(y.rows());
  ContaminatedSample sample{Dataset(std::move(y)), std::move(mask), mu_star, 0.0};
  sample.epsilon_actual = static_cast<double>(sample.outlier_count()) / n;
  return sample;
}

}  // namespace detail

/// n draws of N(mu*, Sigma), then ceil(n eps) of them replaced per the scheme.
/// Uniform outliers keep their Gaussian noise: X_i = mu* + theta_i + xi_i.
inline ContaminatedSample sample_gac(Index n, Index p, const Vector& mu_star,
                                     const SymMatrix& sigma, const ContaminationSpec& spec,
                                     std::uint64_t seed) {
  detail::check_sampler_args(n, p, mu_star, sigma, spec);
  const Matrix root = detail::covariance_root(sigma);
  CounterRng rng(seed, kNoiseStream);
  Matrix y(n, p);
  Vector z(p);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < p; ++j) z[j] = rng.normal();
    y.row(i) = (mu_star + root * z).transpose();
  }
  return detail::finish_sample(std::move(y), mu_star, spec, seed);
}

/// Bounded sub-Gaussian inliers mu* + Sigma^{1/2} xi, xi uniform on the
/// sphere of radius sqrt(p) (identity covariance). Same replacement logic.
inline ContaminatedSample sample_sgac_bounded(Index n, Index p, const Vector& mu_star,
                                              const SymMatrix& sigma,
                                              const ContaminationSpec& spec, std::uint64_t seed) {
  detail::check_sampler_args(n, p, mu_star, sigma, spec);
  const Matrix root = detail::covariance_root(sigma);
  CounterRng rng(seed, kNoiseStream);
  Matrix y(n, p);
  Vector z(p);
  const double radius = std::sqrt(static_cast<double>(p));
  for (Index i = 0; i < n; ++i) {
    do {
      for (Index j = 0; j < p; ++j) z[j] = rng.normal();
    } while (z.norm() == 0.0);
    z *= radius / z.norm();
    y.row(i) = (mu_star + root * z).transpose();
  }
  return detail::finish_sample(std::move(y), mu_star, spec, seed);
}

inline Vector baseline_sample_mean(const Dataset& data) {
  return data.points().colwise().mean().transpose();
}

/// Per-coordinate median; lower median for even n.
inline Vector baseline_coord_median(const Dataset& data) {
  const Index n = data.n();
  Vector out(data.p());
  std::vector<double> column(static_cast<std::size_t>(n));
  const auto k = static_cast<std::size_t>((n - 1) / 2);
  for (Index j = 0; j < data.p(); ++j) {
    for (Index i = 0; i < n; ++i) column[static_cast<std::size_t>(i)] = data.points()(i, j);
    std::nth_element(column.begin(), column.begin() + static_cast<std::ptrdiff_t>(k), column.end());
    out[j] = column[k];
  }
  return out;
}

/// Mean of the true inliers.
inline Vector baseline_oracle_mean(const ContaminatedSample& sample) {
  const Dataset& data = sample.data;
  Vector sum = Vector::Zero(data.p());
  Index count = 0;
  for (Index i = 0; i < data.n(); ++i) {
    if (sample.inlier_mask[static_cast<std::size_t>(i)]) {
      sum += data.row(i).transpose();
      ++count;
    }
  }
  require(count > 0, ErrorCode::NoInliers, "sample has no inliers");
  return sum / static_cast<double>(count);
}

struct RiskSummary {
  std::vector<double> per_seed_errors;
  double mean_error = 0.0;
  double q25 = 0.0;
  double q50 = 0.0;
  double q75 = 0.0;
};

/// Linear-interpolation quantile of sorted values.
inline double sorted_quantile(const std::vector<double>& sorted, double q) {
  require(!sorted.empty(), ErrorCode::InvalidParams, "quantile of an empty list");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

inline RiskSummary summarize(std::vector<double> errors) {
  require(!errors.empty(), ErrorCode::InvalidParams, "no errors to summarize");
  RiskSummary out;
  out.per_seed_errors = errors;
  std::sort(errors.begin(), errors.end());
  out.mean_error = std::accumulate(errors.begin(), errors.end(), 0.0) /
                   static_cast<double>(errors.size());
  out.q25 = sorted_quantile(errors, 0.25);
  out.q50 = sorted_quantile(errors, 0.50);
  out.q75 = sorted_quantile(errors, 0.75);
  return out;
}

enum class ExperimentKind { Decay, Breakdown, Compare };

inline const char* to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Decay: return "decay";
    case ExperimentKind::Breakdown: return "breakdown";
    case ExperimentKind::Compare: return "compare";
  }
  return "unknown";
}

inline ExperimentKind parse_experiment(const std::string& name) {
  if (name == "decay") return ExperimentKind::Decay;
  if (name == "breakdown") return ExperimentKind::Breakdown;
  if (name == "compare") return ExperimentKind::Compare;
  throw Error(ErrorCode::InvalidParams, "unknown experiment '" + name + "'");
}

inline std::vector<double> default_breakdown_epsilons() {
  return {0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40};
}

/// Simulations draw from N(0, I_p) (equivariance makes this general) and
/// run the estimator with the true rate and the known identity covariance.
struct ExperimentParams {
  ExperimentKind kind = ExperimentKind::Compare;
  Index n = 500;
  Index p = 20;
  std::vector<double> epsilons{0.1};
  Scheme scheme = Scheme::UniformOutliers;
  double scheme_a = 4.0;
  double scheme_b = 10.0;
  SolverConfig solver{};
  bool use_early_stop = false;
  std::optional<int> k_override;
  /// Iteration count used past the breakdown threshold in the breakdown sweep.
  int k_beyond_breakdown = 30;
  unsigned workers = 0;  // 0 = hardware concurrency

  void validate() const {
    require(n >= 2 && p >= 1, ErrorCode::InvalidParams, "need n >= 2 and p >= 1");
    require(!epsilons.empty(), ErrorCode::InvalidParams, "no contamination rates given");
    for (double e : epsilons) {
      require(e >= 0.0 && e < 0.5, ErrorCode::InvalidParams, "epsilon must lie in [0, 1/2)");
    }
    require(scheme != Scheme::UniformOutliers || scheme_a <= scheme_b, ErrorCode::InvalidParams,
            "uniform outliers need a <= b");
    require(!k_override || *k_override >= 0, ErrorCode::InvalidParams, "k_override must be >= 0");
    require(k_beyond_breakdown >= 0, ErrorCode::InvalidParams, "k_beyond_breakdown must be >= 0");
    solver.validate();
  }
};

struct ErrorRow {
  std::string experiment;
  std::string scheme;
  Index n = 0;
  Index p = 0;
  double epsilon = 0.0;
  std::string estimator;
  std::uint64_t seed = 0;
  std::optional<int> iteration;  // decay rows only
  double error = 0.0;
};

struct SummaryRow {
  std::string experiment;
  std::string scheme;
  Index n = 0;
  Index p = 0;
  double epsilon = 0.0;
  std::string estimator;
  std::optional<int> iteration;
  RiskSummary risk;
};

struct ExperimentTable {
  std::vector<ErrorRow> rows;
  std::vector<SummaryRow> summaries;
};

inline const std::vector<std::string>& compare_estimators() {
  static const std::vector<std::string> names{"ir", "sample_mean", "coord_median",
                                              "geometric_median", "oracle"};
  return names;
}

namespace detail {

inline IRConfig experiment_ir_config(const ExperimentParams& params, double epsilon) {
  IRConfig cfg;
  cfg.epsilon = epsilon;
  cfg.cov = CovarianceSpec::known(SymMatrix::identity(params.p));
  cfg.solver = params.solver;
  cfg.use_early_stop = params.use_early_stop;
  cfg.k_override = params.k_override;
  if (params.kind == ExperimentKind::Breakdown && !cfg.k_override &&
      epsilon >= breakdown_threshold()) {
    cfg.k_override = params.k_beyond_breakdown;
  }
  return cfg;
}

// All rows of one (epsilon, seed) cell.
inline std::vector<ErrorRow> run_cell(const ExperimentParams& params, double epsilon,
                                      std::uint64_t seed) {
  const ContaminationSpec spec{params.scheme, epsilon, params.scheme_a, params.scheme_b};
  const Vector mu_star = Vector::Zero(params.p);
  const ContaminatedSample sample =
      sample_gac(params.n, params.p, mu_star, SymMatrix::identity(params.p), spec, seed);
  const ErrorRow base{to_string(params.kind), to_string(params.scheme), params.n, params.p,
                      epsilon, "ir", seed, std::nullopt, 0.0};
  std::vector<ErrorRow> rows;
  auto push = [&](const std::string& estimator, const Vector& estimate,
                  std::optional<int> iteration = std::nullopt) {
    ErrorRow row = base;
    row.estimator = estimator;
    row.iteration = iteration;
    row.error = (estimate - mu_star).norm();
    rows.push_back(std::move(row));
  };

  const EstimateReport report = ir_mean(sample.data, experiment_ir_config(params, epsilon));
  switch (params.kind) {
    case ExperimentKind::Decay:
      push("ir", report.initial_estimate, 0);
      for (std::size_t k = 0; k < report.trace.size(); ++k) {
        push("ir", report.trace[k].estimate, static_cast<int>(k + 1));
      }
      break;
    case ExperimentKind::Breakdown:
      push("ir", report.estimate);
      break;
    case ExperimentKind::Compare:
      push("ir", report.estimate);
      push("sample_mean", baseline_sample_mean(sample.data));
      push("coord_median", baseline_coord_median(sample.data));
      push("geometric_median", report.initial_estimate);
      push("oracle", baseline_oracle_mean(sample));
      break;
  }
  return rows;
}

}  // namespace detail

/// Runs every (epsilon, seed) cell, fanning seeds out over worker threads.
/// Row order is (epsilon, seed, estimator/iteration) regardless of scheduling.
inline ExperimentTable run_experiment(const ExperimentParams& params,
                                      const std::vector<std::uint64_t>& seeds) {
  params.validate();
  require(!seeds.empty(), ErrorCode::InvalidParams, "no seeds given");

  struct Job {
    double epsilon;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (double e : params.epsilons) {
    for (std::uint64_t s : seeds) jobs.push_back({e, s});
  }
  std::vector<std::vector<ErrorRow>> results(jobs.size());

  unsigned workers = params.workers != 0 ? params.workers : std::thread::hardware_concurrency();
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(jobs.size())));
  if (workers == 1) {
    for (std::size_t j = 0; j < jobs.size(); ++j) {
      results[j] = detail::run_cell(params, jobs[j].epsilon, jobs[j].seed);
    }
  } else {
    std::vector<std::future<void>> pending;
    for (unsigned w = 0; w < workers; ++w) {
      pending.push_back(std::async(std::launch::async, [&, w] {
        for (std::size_t j = w; j < jobs.size(); j += workers) {
          results[j] = detail::run_cell(params, jobs[j].epsilon, jobs[j].seed);
        }
      }));
    }
    for (auto& f : pending) f.get();
  }

  ExperimentTable table;
  for (auto& cell : results) {
    for (auto& row : cell) table.rows.push_back(std::move(row));
  }

  // One summary per (epsilon, estimator, iteration), in first-seen order.
  for (double e : params.epsilons) {
    std::vector<std::pair<std::string, std::optional<int>>> keys;
    for (const ErrorRow& row : table.rows) {
      if (row.epsilon != e) continue;
      const auto key = std::make_pair(row.estimator, row.iteration);
      if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
    }
    std::stable_sort(keys.begin(), keys.end(), [](const auto& a, const auto& b) {
      return a.second.value_or(-1) < b.second.value_or(-1);
    });
    for (const auto& [estimator, iteration] : keys) {
      std::vector<double> errors;
      for (const ErrorRow& row : table.rows) {
        if (row.epsilon == e && row.estimator == estimator && row.iteration == iteration) {
          errors.push_back(row.error);
        }
      }
      table.summaries.push_back(SummaryRow{to_string(params.kind), to_string(params.scheme),
                                           params.n, params.p, e, estimator, iteration,
                                           summarize(std::move(errors))});
    }
  }
  return table;
}

}  // namespace irmean
