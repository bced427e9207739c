/*
 * Copyright 2026 The GatesBand Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "gatesband/simulation.h"

#include <cmath>

#include "gatesband/estimator.h"
#include "gtest/gtest.h"

namespace gatesband {
namespace {

DgpSpec Correlation(double r, int64_t n, uint64_t seed) {
  DgpSpec s;
  s.kind = DgpKind::kCorrelation;
  s.r = r;
  s.n = n;
  s.seed = seed;
  s.oracle_population = 400000;
  return s;
}

TEST(DgpSpecTest, Validation) {
  EXPECT_TRUE(ValidateDgpSpec(Correlation(0.5, 100, 1)).ok());
  EXPECT_FALSE(ValidateDgpSpec(Correlation(0.5, 101, 1)).ok());
  EXPECT_FALSE(ValidateDgpSpec(Correlation(0.5, 18, 1)).ok());
  EXPECT_FALSE(ValidateDgpSpec(Correlation(1.2, 100, 1)).ok());
  DgpSpec small = Correlation(0.5, 100, 1);
  small.oracle_population = 50;
  EXPECT_FALSE(ValidateDgpSpec(small).ok());
  EXPECT_EQ(*ParseDgpKind("acic28"), DgpKind::kAcic28);
  EXPECT_EQ(DgpKindName(DgpKind::kCorrelation), "correlation");
  EXPECT_FALSE(ParseDgpKind("acic").ok());
  EXPECT_EQ(*ParseScoreKind(ScoreKindName(ScoreKind::kLinearFit)),
            ScoreKind::kLinearFit);
}

// Reference values from a separate transcription that groups the terms into
// a shared baseline plus one modifier per arm.
TEST(Acic28Test, PinnedPoint) {
  const std::array<double, 8> x = {0.3, -0.5, -0.85, 0.4,
                                   -0.2, 1.1, 0.7, -0.6};
  EXPECT_NEAR(Acic28Mean(x, 0), -0.33568399999999965, 1e-12);
  EXPECT_NEAR(Acic28Mean(x, 1), 8.8631624, 1e-12);
  EXPECT_NEAR(Acic28Mean(x, 1) - Acic28Mean(x, 0), 9.1988464, 1e-12);
}

TEST(GenerateTest, CorrelationStructure) {
  DgpSpec spec = Correlation(1.0, 40, 3);
  auto score = BuildScore(spec, {});
  auto data = Generate(spec, *score);
  ASSERT_TRUE(data.ok());
  const auto& units = data->dataset.units();
  EXPECT_EQ(data->dataset.n1(), 20);
  EXPECT_EQ(data->dataset.n0(), 20);
  for (size_t i = 0; i < units.size(); ++i) {
    EXPECT_EQ(units[i].score, units[i].covariates[0]);
    EXPECT_EQ(data->true_effects[i], units[i].covariates[0]);
    EXPECT_EQ(units[i].outcome,
              units[i].covariates[0] * (1.0 + units[i].treatment));
  }
  EXPECT_EQ(units.front().id, "1");
}

TEST(GenerateTest, ZeroCorrelationScoreIsIndependent) {
  DgpSpec spec = Correlation(0.0, 5000, 4);
  auto data = Generate(spec, *BuildScore(spec, {}));
  double sxy = 0, sxx = 0, syy = 0;
  for (const auto& u : data->dataset.units()) {
    sxy += u.score * u.covariates[0];
    sxx += u.covariates[0] * u.covariates[0];
    syy += u.score * u.score;
  }
  EXPECT_LT(std::abs(sxy / std::sqrt(sxx * syy)), 4.0 / std::sqrt(5000.0));
}

TEST(GenerateTest, Acic28ShapeAndDeterminism) {
  DgpSpec spec;
  spec.kind = DgpKind::kAcic28;
  spec.n = 60;
  spec.seed = 9;
  auto score = BuildScore(spec, {});
  auto a = Generate(spec, *score);
  auto b = Generate(spec, *score);
  ASSERT_TRUE(a.ok());
  EXPECT_EQ(a->dataset.covariate_dim(), 8);
  EXPECT_EQ(a->dataset.covariate_names()[3], "x29");
  EXPECT_EQ(a->dataset.n1(), 30);
  for (size_t i = 0; i < 60; ++i) {
    EXPECT_EQ(a->dataset.units()[i].outcome, b->dataset.units()[i].outcome);
    std::array<double, 8> x;
    std::copy(a->dataset.units()[i].covariates.begin(),
              a->dataset.units()[i].covariates.end(), x.begin());
    EXPECT_NEAR(a->true_effects[i], Acic28Mean(x, 1) - Acic28Mean(x, 0),
                1e-12);
  }
}

TEST(BuildScoreTest, LinearFitRecoversEffectSlope) {
  DgpSpec spec = Correlation(0.5, 100, 1);
  ScoreRule rule;
  rule.kind = ScoreKind::kLinearFit;
  rule.fit_n = 500;
  auto score = BuildScore(spec, rule);
  ASSERT_TRUE(score.ok());
  LatentUnit u;
  for (double x : {-2.0, 0.0, 0.7, 3.0}) {
    u.covariates = {x};
    EXPECT_NEAR((*score)(u), x, 1e-9);
  }
  ScoreRule bad;
  bad.noise_sd = -1;
  DgpSpec acic = spec;
  acic.kind = DgpKind::kAcic28;
  EXPECT_FALSE(BuildScore(acic, bad).ok());
}

// Psi(p) = r phi(z_{1-p}) / p for correlation(r); reference values of
// phi(z_{1-p}) / p from scipy.
TEST(TrueGatesOracleTest, MatchesGaussianTailMeans) {
  const double tail[][2] = {{0.05, 2.0627128075074275},
                            {0.1, 1.7549833193248683},
                            {0.3, 1.1589753806669127},
                            {0.5, 0.7978845608028654},
                            {0.9, 0.19499814659165204}};
  for (double r : {1.0, 0.5}) {
    DgpSpec spec = Correlation(r, 100, 5);
    auto truth = TrueGatesOracle(spec, *BuildScore(spec, {}));
    ASSERT_TRUE(truth.ok());
    for (const auto& row : tail) {
      EXPECT_NEAR(truth->At(row[0]), r * row[1], 0.015)
          << "r=" << r << " p=" << row[0];
    }
    EXPECT_EQ(truth->At(1.0), truth->ate());
    EXPECT_LT(std::abs(truth->ate()), 0.01);
  }
  DgpSpec flat = Correlation(0.0, 100, 5);
  auto truth = TrueGatesOracle(flat, *BuildScore(flat, {}));
  EXPECT_NEAR(truth->At(0.1), 0.0, 0.03);
}

TEST(TrueGatesOracleTest, NonIncreasingForOracleScore) {
  DgpSpec spec = Correlation(1.0, 100, 6);
  spec.oracle_population = 10000;
  auto truth = TrueGatesOracle(spec, *BuildScore(spec, {}));
  for (size_t i = 1; i < truth->prefix_means.size(); ++i) {
    EXPECT_LE(truth->prefix_means[i], truth->prefix_means[i - 1] + 1e-12);
  }
}

BandCoefficients SmallCalibration() {
  EngineConfig cfg;
  cfg.trials = 4000;
  cfg.grid_points = 1000;
  cfg.seed = 1;
  cfg.workers = 1;
  return *CalibrateMinArea(0.05, 0.0, cfg);
}

TEST(CoverageStudyTest, ReproducibleAcrossWorkers) {
  const BandCoefficients coeffs = SmallCalibration();
  CoverageConfig cfg;
  cfg.dgp = Correlation(0.5, 100, 3);
  cfg.replications = 20;
  cfg.workers = 1;
  auto a = CoverageStudy(cfg, coeffs);
  cfg.workers = 3;
  auto b = CoverageStudy(cfg, coeffs);
  ASSERT_TRUE(a.ok());
  EXPECT_EQ(a->uniform, b->uniform);
  EXPECT_EQ(a->pointwise, b->pointwise);
  EXPECT_EQ(a->width_ratio, b->width_ratio);
  EXPECT_EQ(a->selection_argmax_lower, b->selection_argmax_lower);
  EXPECT_EQ(a->replications, 20);
  EXPECT_EQ(a->band_family, "min_area");
}

TEST(CoverageStudyTest, UniformCoversAndPointwiseDoesNot) {
  const BandCoefficients coeffs = SmallCalibration();
  CoverageConfig cfg;
  cfg.dgp = Correlation(0.5, 100, 11);
  cfg.replications = 300;
  auto r = CoverageStudy(cfg, coeffs);
  ASSERT_TRUE(r.ok());
  EXPECT_GE(r->uniform, 0.92);
  EXPECT_LE(r->uniform, 0.995);
  EXPECT_LT(r->pointwise, r->uniform);
  EXPECT_LE(r->pointwise, r->pointwise_inflated);
  EXPECT_GE(r->width_ratio, 1.1);
  EXPECT_LE(r->width_ratio, 2.0);
  EXPECT_GE(r->selection_argmax_lower, 0.92);
  EXPECT_GE(r->selection_threshold, 0.92);
}

TEST(CoverageStudyTest, BridgeBandOnMeanAdjustedTruth) {
  EngineConfig ecfg;
  ecfg.trials = 4000;
  ecfg.grid_points = 1000;
  ecfg.seed = 2;
  ecfg.workers = 1;
  auto coeffs = CalibrateBridge(0.05, ecfg);
  CoverageConfig cfg;
  cfg.dgp = Correlation(0.5, 100, 12);
  cfg.replications = 200;
  auto r = CoverageStudy(cfg, *coeffs);
  ASSERT_TRUE(r.ok()) << r.status();
  EXPECT_EQ(r->band_family, "bridge");
  EXPECT_GE(r->uniform, 0.9);
}

TEST(CoverageStudyTest, StandardError) {
  EXPECT_NEAR(CoverageStandardError(0.95, 500), std::sqrt(0.95 * 0.05 / 500),
              1e-15);
  EXPECT_EQ(CoverageStandardError(1.0, 10), 0.0);
}

TEST(CorrelationDemoTest, SignsAndValidation) {
  CorrelationDemoConfig cfg;
  cfg.r_grid = {0.9, 0.0};
  cfg.trials = 2000;
  cfg.seed = 4;
  auto rows = CorrelationDemo(cfg);
  ASSERT_TRUE(rows.ok());
  ASSERT_EQ(rows->size(), 2u);
  EXPECT_EQ((*rows)[0].r, 0.9);
  EXPECT_GT((*rows)[0].mean_cov, 0.0);
  EXPECT_GT((*rows)[0].mean_cov, 3 * (*rows)[0].se);
  EXPECT_GE((*rows)[1].mean_cov, -2 * (*rows)[1].se);
  EXPECT_LT(std::abs((*rows)[1].mean_cov), 4 * (*rows)[1].se + 0.002);
  EXPECT_GT((*rows)[1].se, 0.0);

  cfg.trials = 999;
  EXPECT_FALSE(CorrelationDemo(cfg).ok());
  cfg.trials = 1000;
  cfg.r_grid.clear();
  EXPECT_FALSE(CorrelationDemo(cfg).ok());
}

}  // namespace
}  // namespace gatesband
