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

// Sorted group average treatment effect (GATES) curves.
//
// For a dataset sorted by score, the plain curve on the grid p_i = i/n is
//
//   Psi(p_i) = (1/i) * sum_{k<=i} psi_k,
//   psi_k    = T_k Y_k / (n1/n) - (1 - T_k) Y_k / (n0/n),
//
// i.e. the inverse-probability-weighted effect among the top-i units. The
// other families reuse the same prefix-mean machinery with a different
// unit-level statistic: a per-unit treatment cost is subtracted
// (cost-adjusted), the overall effect is removed in proportion to p
// (mean-adjusted), or a covariate is averaged instead of an effect.
//
// Variances are plug-in estimates of Var(Psi(p)) that condition on the
// selection being "rank <= np":
//
//   V(p) = (1/p^2) { S1^2/n1 + S0^2/n0 - p(1-p)/(n-1) * Psi(p)^2 }
//
// with S_t^2 the within-arm sample variance of 1{rank <= np} * Y.

#ifndef GATESBAND_ESTIMATOR_H_
#define GATESBAND_ESTIMATOR_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "gatesband/dataset.h"

namespace gatesband {

enum class StatisticKind { kPlain, kCostAdjusted, kMeanAdjusted, kCovariate };

// Cost c_p(x) of treating a unit with covariates x when the top fraction p is
// treated. Set `depends_on_p` when the value changes with p; otherwise the
// function is called once per unit with p = 1.
struct CostModel {
  std::function<double(std::span<const double> covariates, double p)> fn;
  bool depends_on_p = false;
};

struct StatisticFamily {
  StatisticKind kind = StatisticKind::kPlain;
  int covariate = -1;   // kCovariate only
  bool negate = false;  // kCovariate only: average -X_j (for upper bounds)
  std::optional<CostModel> cost;

  static StatisticFamily Plain() { return {}; }
  static StatisticFamily MeanAdjusted() {
    return {StatisticKind::kMeanAdjusted, -1, false, std::nullopt};
  }
  static StatisticFamily CostAdjusted(CostModel cost) {
    return {StatisticKind::kCostAdjusted, -1, false, std::move(cost)};
  }
  static StatisticFamily Covariate(int j, bool negate = false) {
    return {StatisticKind::kCovariate, j, negate, std::nullopt};
  }

  // "plain", "cost_adjusted", "mean_adjusted", "covariate(j)" or
  // "neg_covariate(j)".
  std::string Name() const;
};

struct GatesCurve {
  std::vector<double> grid;       // i/n, i = 1..n
  std::vector<double> values;     // curve estimate at each grid point
  std::vector<double> variances;  // plug-in variance of each value
  // Variance of the plain (unadjusted) prefix statistic. It sets the time
  // scale of the limiting Wiener process and equals `variances` for every
  // family except mean-adjusted.
  std::vector<double> process_variances;
  StatisticFamily family;
  int64_t n = 0;
  int64_t n1 = 0;
  int64_t n0 = 0;

  size_t size() const { return grid.size(); }
  // Index of the largest grid point <= p. Fails for p < 1/n or p > 1.
  absl::StatusOr<size_t> IndexAt(double p) const;
};

// Per-unit IPW effect estimates in score order.
std::vector<double> IteEstimates(const SortedDataset& sorted);

absl::StatusOr<GatesCurve> ComputeGatesCurve(const SortedDataset& sorted,
                                             const StatisticFamily& family);

// Grid-aligned plug-in variances (the `variances` member of the curve).
absl::StatusOr<std::vector<double>> GatesVariance(
    const SortedDataset& sorted, const StatisticFamily& family);

// values - z_{1-alpha} * sqrt(variances).
absl::StatusOr<std::vector<double>> PointwiseBand(const GatesCurve& curve,
                                                  double alpha);

}  // namespace gatesband

#endif  // GATESBAND_ESTIMATOR_H_
