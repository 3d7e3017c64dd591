#include "irmean/irmean.hpp"
#include "oracles.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace irmean;
using testing_support::code_of;
using testing_support::vec;

TEST(EpsilonGrid, LengthAndFirstLevel) {
  const std::vector<double> grid = epsilon_grid(0.9, 10, 1000);
  ASSERT_EQ(grid.size(), 21u);
  EXPECT_NEAR(grid[0], 0.24875388202501894, 1e-15);
  for (std::size_t l = 1; l < grid.size(); ++l) EXPECT_NEAR(grid[l], 0.9 * grid[l - 1], 1e-16);
  EXPECT_EQ(grid_length(0.9, 10, 1000), 21);
}

TEST(EpsilonGrid, EmptyWhenPEqualsN) {
  EXPECT_TRUE(epsilon_grid(0.9, 50, 50).empty());
}

TEST(EpsilonGrid, Errors) {
  EXPECT_EQ(code_of([] { epsilon_grid(1.0, 1, 10); }), ErrorCode::InvalidRatio);
  EXPECT_EQ(code_of([] { epsilon_grid(0.0, 1, 10); }), ErrorCode::InvalidRatio);
  EXPECT_EQ(code_of([] { epsilon_grid(0.5, 11, 10); }), ErrorCode::InvalidParams);
}

TEST(LepskiRadius, AtZero) {
  LepskiConfig cfg;
  cfg.a5 = 1.0;
  cfg.sigma_op = 1.0;
  cfg.delta = 4.0 / std::numbers::e;
  EXPECT_NEAR(lepski_radius(0.0, cfg, 4, 100, 1), std::sqrt(0.05), 1e-12);
}

TEST(LepskiRadius, IncreasingAndBlowsUp) {
  const LepskiConfig cfg;
  const double r0 = lepski_radius(0.0, cfg, 5, 500, 10);
  EXPECT_LT(lepski_radius(0.1, cfg, 5, 500, 10), lepski_radius(0.2, cfg, 5, 500, 10));
  double previous = r0;
  for (double z = 0.01; z < breakdown_threshold(); z += 0.01) {
    const double r = lepski_radius(z, cfg, 5, 500, 10);
    EXPECT_GT(r, previous);
    previous = r;
  }
  EXPECT_GT(lepski_radius(breakdown_threshold() - 1e-9, cfg, 5, 500, 10), 1e6 * r0);
}

TEST(LepskiRadius, Errors) {
  const LepskiConfig cfg;
  EXPECT_EQ(code_of([&] { lepski_radius(breakdown_threshold(), cfg, 5, 500, 10); }),
            ErrorCode::ZOutOfRange);
  EXPECT_EQ(code_of([&] { lepski_radius(-0.1, cfg, 5, 500, 10); }), ErrorCode::ZOutOfRange);
  EXPECT_EQ(code_of([&] { lepski_radius(0.1, cfg, 5, 500, 0); }), ErrorCode::EmptyGrid);
}

TEST(LepskiRadius, ArbitraryCovarianceUsesSqrtRate) {
  LepskiConfig iso;
  LepskiConfig arb;
  arb.cov = CovarianceSpec::unknown_arbitrary();
  const double z = 0.04;
  const double base = lepski_radius(0.0, iso, 5, 500, 10);
  const double denom = 1.0 - 2 * z - std::sqrt(z * (1 - z));
  EXPECT_NEAR(lepski_radius(z, arb, 5, 500, 10), (base + 3 * std::sqrt(z)) / denom, 1e-12);
  EXPECT_NEAR(lepski_radius(z, iso, 5, 500, 10),
              (base + z * std::sqrt(std::log(1 / z))) / denom, 1e-12);
}

TEST(SelectLevel, PrefixScan) {
  const std::vector<Vector> centers{vec({0}), vec({1}), vec({10}), vec({1.5})};
  // Balls 1-2 meet, ball 3 is far away, ball 4 would meet 1-2 again.
  EXPECT_EQ(select_level(centers, {1.0, 1.0, 1.0, 1.0}), 2);
  EXPECT_EQ(select_level(centers, {100.0, 100.0, 100.0, 100.0}), 4);
  EXPECT_EQ(select_level({vec({0})}, {0.0}), 1);
  EXPECT_EQ(code_of([] { select_level({}, {}); }), ErrorCode::EmptyGrid);
}

TEST(SelectLevel, MonotoneInRadiusScale) {
  std::mt19937_64 gen(12);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Vector> centers;
    std::vector<double> radii;
    for (int l = 0; l < 8; ++l) {
      centers.push_back(oracle::random_matrix(gen, 2, 1).col(0));
      radii.push_back(0.2 + 0.1 * l);
    }
    int previous = 0;
    for (double scale : {0.5, 1.0, 2.0, 4.0, 8.0}) {
      std::vector<double> scaled = radii;
      for (double& r : scaled) r *= scale;
      const int level = select_level(centers, scaled);
      EXPECT_GE(level, previous);
      previous = level;
    }
  }
}

TEST(SelectLevel, NeverPastFirstEmptyPrefix) {
  std::mt19937_64 gen(13);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Vector> centers;
    std::vector<double> radii;
    for (int l = 0; l < 6; ++l) {
      centers.push_back(oracle::random_matrix(gen, 2, 1, 2.0).col(0));
      radii.push_back(1.0);
    }
    const int level = select_level(centers, radii);
    // Two disjoint balls inside the first `level` would contradict the scan.
    for (int i = 0; i < level; ++i) {
      for (int j = 0; j < level; ++j) {
        EXPECT_LE((centers[i] - centers[j]).norm(), 2.0 + 1e-5);
      }
    }
    if (level < 6) {
      std::vector<Vector> prefix(centers.begin(), centers.begin() + level + 1);
      std::vector<double> r(radii.begin(), radii.begin() + level + 1);
      EXPECT_FALSE(balls_intersection_point(prefix, r, 1e-6).has_value());
    }
  }
}

TEST(AdaptiveIrMean, HugeRadiiSelectLastLevel) {
  const ContaminatedSample s = sample_gac(200, 3, Vector::Zero(3), SymMatrix::identity(3),
                                          {Scheme::UniformOutliers, 0.05, 2.0, 4.0}, 9);
  LepskiConfig cfg;
  cfg.a = 0.7;
  cfg.a5 = 1e9;
  cfg.cov = CovarianceSpec::known(SymMatrix::identity(3));
  const AdaptiveResult r = adaptive_ir_mean(s.data, cfg);
  const int l_max = grid_length(0.7, 3, 200);
  EXPECT_EQ(r.selected_level, l_max);
  EXPECT_EQ(r.per_level.size(), static_cast<std::size_t>(l_max));
  EXPECT_EQ(r.selected_epsilon, r.grid.back());
  IRConfig ir;
  ir.epsilon = r.grid.back();
  ir.cov = cfg.cov;
  EXPECT_EQ(r.estimate, ir_mean(s.data, ir).estimate);
}

TEST(AdaptiveIrMean, SingletonGrid) {
  // 0.5 log_0.5(1/5) = 1.16
  const ContaminatedSample s =
      sample_gac(5, 1, Vector::Zero(1), SymMatrix::identity(1), {}, 3);
  LepskiConfig cfg;
  cfg.a = 0.5;
  ASSERT_EQ(grid_length(0.5, 1, 5), 1);
  const AdaptiveResult r = adaptive_ir_mean(s.data, cfg);
  EXPECT_EQ(r.selected_level, 1);
  EXPECT_EQ(r.grid.size(), 1u);
}

TEST(AdaptiveIrMean, EmptyGrid) {
  const ContaminatedSample s = sample_gac(4, 4, Vector::Zero(4), SymMatrix::identity(4), {}, 3);
  EXPECT_EQ(code_of([&] { adaptive_ir_mean(s.data, LepskiConfig{}); }), ErrorCode::EmptyGrid);
}

TEST(AdaptiveIrMean, ConfigValidation) {
  const ContaminatedSample s = sample_gac(50, 2, Vector::Zero(2), SymMatrix::identity(2), {}, 3);
  LepskiConfig cfg;
  cfg.delta = 1.5;
  EXPECT_EQ(code_of([&] { adaptive_ir_mean(s.data, cfg); }), ErrorCode::InvalidParams);
  cfg.delta = 0.1;
  cfg.a = 1.2;
  EXPECT_EQ(code_of([&] { adaptive_ir_mean(s.data, cfg); }), ErrorCode::InvalidRatio);
}

TEST(CalibrateA5, MatchesQuantileAtZero) {
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t s = 1; s <= 50; ++s) seeds.push_back(s);
  const SymMatrix sigma = SymMatrix::identity(3);
  const double a5 = calibrate_a5(200, sigma, 0.9, 0.1, seeds);
  std::vector<double> errors;
  for (std::uint64_t s : seeds) {
    errors.push_back(
        baseline_sample_mean(sample_gac(200, 3, Vector::Zero(3), sigma, {}, s).data).norm());
  }
  std::sort(errors.begin(), errors.end());
  LepskiConfig cfg;
  cfg.a5 = a5;
  EXPECT_NEAR(lepski_radius(0.0, cfg, 3, 200, grid_length(0.9, 3, 200)),
              sorted_quantile(errors, 0.9), 1e-12);
  EXPECT_GT(a5, 0.0);
}
