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

#include "gatesband/selection.h"

#include <random>

#include "gtest/gtest.h"

namespace gatesband {
namespace {

// n units with scores n..1, so rank i holds id "u{i+1}".
SortedDataset Ranked(int n, int dim = 1) {
  std::vector<UnitRecord> units;
  for (int i = 0; i < n; ++i) {
    UnitRecord u;
    u.id = "u" + std::to_string(i + 1);
    u.outcome = static_cast<double>(i % 3);
    u.treatment = i % 2;
    u.score = static_cast<double>(n - i);
    for (int j = 0; j < dim; ++j) u.covariates.push_back(0.5 * i + j);
    units.push_back(u);
  }
  return SortByScore(*MakeDataset(std::move(units), 0));
}

GatesCurve CurveWith(const std::vector<double>& values) {
  GatesCurve c;
  const int n = static_cast<int>(values.size());
  c.n = n;
  for (int i = 1; i <= n; ++i) {
    c.grid.push_back(static_cast<double>(i) / n);
  }
  c.values = values;
  c.variances.assign(values.size(), 1.0);
  c.process_variances = c.variances;
  return c;
}

UniformBand BandWith(const std::vector<double>& lower) {
  UniformBand b;
  b.lower = lower;
  b.alpha = 0.05;
  return b;
}

TEST(SelectArgmaxLowerTest, UniqueMaximum) {
  const auto sorted = Ranked(10);
  const auto curve = CurveWith(std::vector<double>(10, 1.0));
  const auto band =
      BandWith({-3, -2, 0.4, 0.1, 0.0, -0.2, -0.3, -0.4, -0.5, -0.6});
  auto r = SelectArgmaxLower(sorted, curve, band);
  ASSERT_TRUE(r.ok());
  EXPECT_DOUBLE_EQ(r->p_selected, 0.3);
  EXPECT_EQ(r->index, 2u);
  EXPECT_EQ(r->guaranteed_lower, 0.4);
  EXPECT_EQ(r->estimate, 1.0);
  EXPECT_EQ(r->selected_ids, (std::vector<std::string>{"u1", "u2", "u3"}));
  EXPECT_EQ(r->rule, SelectionRule::kArgmaxLower);
}

TEST(SelectArgmaxLowerTest, AllNegativeStillReturnsMaximum) {
  const auto sorted = Ranked(5);
  auto r = SelectArgmaxLower(sorted, CurveWith({0, 0, 0, 0, 0}),
                             BandWith({-5, -4, -1, -2, -3}));
  EXPECT_DOUBLE_EQ(r->p_selected, 0.6);
  EXPECT_LT(r->guaranteed_lower, 0.0);
}

TEST(SelectArgmaxLowerTest, TiesGoToLargerP) {
  const auto sorted = Ranked(5);
  auto r = SelectArgmaxLower(sorted, CurveWith({0, 0, 0, 0, 0}),
                             BandWith({1, 2, 2, 0, 2}));
  EXPECT_DOUBLE_EQ(r->p_selected, 1.0);
}

TEST(SelectArgmaxLowerTest, ConstrainedMatchesBruteForce) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z;
  const auto sorted = Ranked(40);
  const auto curve = CurveWith(std::vector<double>(40, 0.0));
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> lower(40);
    for (double& v : lower) v = z(rng);
    GridConstraint c{0.5, 0.9};
    auto r = SelectArgmaxLower(sorted, curve, BandWith(lower), c);
    size_t best = 0;
    double best_v = -INFINITY;
    for (size_t i = 0; i < 40; ++i) {
      const double p = (i + 1) / 40.0;
      if (p >= 0.5 && p <= 0.9 && lower[i] >= best_v) {
        best = i;
        best_v = lower[i];
      }
    }
    EXPECT_EQ(r->index, best);
    EXPECT_GE(r->p_selected, 0.5);
    EXPECT_LE(r->p_selected, 0.9);
  }
}

TEST(SelectArgmaxLowerTest, EmptyConstraintAndMisalignment) {
  const auto sorted = Ranked(10);
  const auto curve = CurveWith(std::vector<double>(10, 0.0));
  const auto band = BandWith(std::vector<double>(10, 0.0));
  EXPECT_FALSE(SelectArgmaxLower(sorted, curve, band, {0.55, 0.58}).ok());
  EXPECT_FALSE(
      SelectArgmaxLower(sorted, curve, BandWith({0.0, 1.0})).ok());
  EXPECT_FALSE(SelectArgmaxLower(Ranked(12), curve, band).ok());
}

TEST(SelectArgmaxPointTest, UsesEstimates) {
  const auto sorted = Ranked(4);
  auto r = SelectArgmaxPoint(sorted, CurveWith({5, 1, 1, 1}),
                             BandWith({-10, 0, 0.5, 0}));
  EXPECT_EQ(r->index, 0u);
  EXPECT_EQ(r->guaranteed_lower, -10);
  EXPECT_EQ(r->rule, SelectionRule::kArgmaxPoint);
}

TEST(SelectThresholdTest, Cases) {
  const auto sorted = Ranked(6);
  const auto curve = CurveWith(std::vector<double>(6, 0.0));
  const auto band = BandWith({0.5, 1.0, 0.8, 0.3, 0.2, 0.1});

  auto below = SelectThreshold(sorted, curve, band, 0.0);
  ASSERT_TRUE(below->has_value());
  EXPECT_DOUBLE_EQ((*below)->p_selected, 1.0);

  auto above = SelectThreshold(sorted, curve, band, 2.0);
  ASSERT_TRUE(above.ok());
  EXPECT_FALSE(above->has_value());

  auto mid = SelectThreshold(sorted, curve, band, 0.7);
  ASSERT_TRUE(mid->has_value());
  EXPECT_DOUBLE_EQ((*mid)->p_selected, 0.5);
  EXPECT_EQ((*mid)->threshold, 0.7);
  EXPECT_EQ((*mid)->selected_ids.size(), 3u);
}

TEST(SelectThresholdTest, MonotoneInThreshold) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> z;
  const auto sorted = Ranked(30);
  const auto curve = CurveWith(std::vector<double>(30, 0.0));
  std::vector<double> lower(30);
  for (double& v : lower) v = z(rng);
  const auto band = BandWith(lower);
  double prev = 2.0;
  for (double c = -3.0; c <= 3.0; c += 0.1) {
    auto r = SelectThreshold(sorted, curve, band, c);
    const double p = r->has_value() ? (*r)->p_selected : 0.0;
    EXPECT_LE(p, prev);
    if (r->has_value()) {
      EXPECT_GE((*r)->guaranteed_lower, c);
    }
    prev = p;
  }
}

TEST(SelectionTest, SelectedIdsAreTheTopUnits) {
  for (int n : {7, 20, 33}) {
    const auto sorted = Ranked(n);
    const auto curve = CurveWith(std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i) {
      std::vector<double> lower(n, 0.0);
      lower[i] = 1.0;
      auto r = SelectArgmaxLower(sorted, curve, BandWith(lower));
      const size_t expected = static_cast<size_t>(
          std::floor(n * r->p_selected + 1e-9));
      ASSERT_EQ(r->selected_ids.size(), expected);
      for (size_t k = 0; k < expected; ++k) {
        EXPECT_EQ(r->selected_ids[k], "u" + std::to_string(k + 1));
      }
    }
  }
}

TEST(DefaultConstraintTest, SmallGroupsExcluded) {
  EXPECT_DOUBLE_EQ(DefaultConstraint(100, 0.0).p_min, 0.05);
  EXPECT_DOUBLE_EQ(DefaultConstraint(100, 0.2).p_min, 0.2);
  EXPECT_DOUBLE_EQ(DefaultConstraint(1000, 0.0).p_min, 0.005);
  EXPECT_EQ(DefaultConstraint(100, 0.0).p_max, 1.0);
}

TEST(SelectionRuleTest, Names) {
  EXPECT_EQ(SelectionRuleName(SelectionRule::kArgmaxLower), "argmax_lower");
  EXPECT_EQ(SelectionRuleName(SelectionRule::kThreshold), "threshold");
  EXPECT_EQ(SelectionRuleName(SelectionRule::kArgmaxPoint), "argmax_point");
}

BandCoefficients AreaCoefficients() {
  BandCoefficients c;
  c.alpha = 0.05;
  c.c0 = 0.7;
  c.c1 = 1.4;
  return c;
}

TEST(CharacterizeTest, ConstantCovariateCollapses) {
  std::vector<UnitRecord> units;
  for (int i = 0; i < 20; ++i) {
    units.push_back({std::to_string(i), 1.0 * (i % 4), i % 2,
                     static_cast<double>(i), {3.0, 0.1 * i}});
  }
  const auto sorted = SortByScore(*MakeDataset(units, 0));
  auto curve = ComputeGatesCurve(sorted, StatisticFamily::Plain());
  auto band = BandLowerBound(*curve, AreaCoefficients());
  auto r = Characterize(sorted, {0, 1}, *band, AreaCoefficients());
  ASSERT_TRUE(r.ok()) << r.status();
  ASSERT_EQ(r->covariates.size(), 2u);
  const CovariateBounds& constant = r->covariates[0];
  EXPECT_EQ(constant.population_mean, 3.0);
  for (size_t i = 0; i < constant.lower.size(); ++i) {
    EXPECT_NEAR(constant.lower[i], 3.0, 1e-3);
    EXPECT_NEAR(constant.upper[i], 3.0, 1e-3);
  }
  const CovariateBounds& varying = r->covariates[1];
  for (size_t i = 0; i < varying.lower.size(); ++i) {
    EXPECT_LE(varying.lower[i], varying.curve.values[i]);
    EXPECT_GE(varying.upper[i], varying.curve.values[i]);
  }
  EXPECT_DOUBLE_EQ(r->joint_level, 0.85);
  EXPECT_DOUBLE_EQ(r->joint_level_two_sided, 0.75);
  EXPECT_EQ(r->main_lower, band->lower);
  EXPECT_EQ(varying.name, "x1");
}

TEST(CharacterizeTest, Errors) {
  const auto sorted = Ranked(20, 2);
  auto curve = ComputeGatesCurve(sorted, StatisticFamily::Plain());
  auto band = BandLowerBound(*curve, AreaCoefficients());
  auto out = Characterize(sorted, {2}, *band, AreaCoefficients());
  ASSERT_FALSE(out.ok());
  EXPECT_EQ(out.status().code(), absl::StatusCode::kOutOfRange);
  EXPECT_FALSE(Characterize(sorted, {-1}, *band, AreaCoefficients()).ok());
  BandCoefficients bridge = AreaCoefficients();
  bridge.family = BandFamily::kBridge;
  EXPECT_FALSE(Characterize(sorted, {0}, *band, bridge).ok());
  auto none = Characterize(sorted, {}, *band, AreaCoefficients());
  EXPECT_DOUBLE_EQ(none->joint_level, 0.95);
}

}  // namespace
}  // namespace gatesband
