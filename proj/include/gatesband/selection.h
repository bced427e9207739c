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

// Subgroup choices backed by a uniform lower band. Because the band covers
// the whole curve at once, the guarantee Psi(p) >= lower(p) holds at the
// chosen p however it was picked from the data.

#ifndef GATESBAND_SELECTION_H_
#define GATESBAND_SELECTION_H_

#include <optional>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "gatesband/band_calibration.h"
#include "gatesband/dataset.h"
#include "gatesband/estimator.h"

namespace gatesband {

enum class SelectionRule { kArgmaxLower, kThreshold, kArgmaxPoint };

std::string SelectionRuleName(SelectionRule rule);

// Grid points with p_min <= p <= p_max.
struct GridConstraint {
  double p_min = 0.0;
  double p_max = 1.0;
};

struct SubgroupReport {
  SelectionRule rule = SelectionRule::kArgmaxLower;
  double threshold = 0.0;  // kThreshold only
  double alpha = 0.0;
  size_t index = 0;  // grid index of p_selected
  double p_selected = 0.0;
  double estimate = 0.0;
  double guaranteed_lower = 0.0;
  // Ids of the top floor(n * p_selected) units in score order.
  std::vector<std::string> selected_ids;
};

// argmax of the lower band within the constraint; ties go to the larger p.
absl::StatusOr<SubgroupReport> SelectArgmaxLower(
    const SortedDataset& sorted, const GatesCurve& curve,
    const UniformBand& band, const GridConstraint& constraint = {});

// Largest grid p with lower(p) >= c, or nullopt when none qualifies.
absl::StatusOr<std::optional<SubgroupReport>> SelectThreshold(
    const SortedDataset& sorted, const GatesCurve& curve,
    const UniformBand& band, double c);

// Naive argmax of the point estimate. Reported for comparison only: the band
// value there is still a valid guarantee, but the choice ignores uncertainty.
absl::StatusOr<SubgroupReport> SelectArgmaxPoint(
    const SortedDataset& sorted, const GatesCurve& curve,
    const UniformBand& band, const GridConstraint& constraint = {});

// Bounds for E(X_j | top p) next to the main curve's band.
struct CovariateBounds {
  int covariate = 0;
  std::string name;
  double population_mean = 0.0;
  GatesCurve curve;           // Psi^{X_j}
  std::vector<double> lower;  // uniform lower band of Psi^{X_j}
  std::vector<double> upper;  // from the band of -X_j, negated
};

struct CharacterizationReport {
  double alpha = 0.0;  // per-statement level
  // Bonferroni level of the main band plus one lower band per covariate:
  // 1 - (m + 1) alpha.
  double joint_level = 0.0;
  // Including the upper bands as separate statements: 1 - (2m + 1) alpha.
  double joint_level_two_sided = 0.0;
  std::vector<double> main_lower;
  std::vector<CovariateBounds> covariates;
};

// Applies `coeffs` (calibrated at level alpha, not a bridge band) to the
// covariate curves of each index in `covariates`. Errors on an out-of-range
// index.
absl::StatusOr<CharacterizationReport> Characterize(
    const SortedDataset& sorted, const std::vector<int>& covariates,
    const UniformBand& main_band, const BandCoefficients& coeffs);

// Default constraint: p >= max(p_l, 5/n).
GridConstraint DefaultConstraint(int64_t n, double p_l);

}  // namespace gatesband

#endif  // GATESBAND_SELECTION_H_
