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

#include <algorithm>

#include "absl/strings/str_cat.h"

namespace gatesband {

namespace {

absl::Status CheckAligned(const SortedDataset& sorted, const GatesCurve& curve,
                          const UniformBand& band) {
  if (band.lower.size() != curve.size()) {
    return absl::InvalidArgumentError(
        absl::StrCat("band has ", band.lower.size(), " points, curve has ",
                     curve.size()));
  }
  if (curve.n != sorted.n()) {
    return absl::InvalidArgumentError("curve and dataset sizes differ");
  }
  return absl::OkStatus();
}

SubgroupReport MakeReport(const SortedDataset& sorted, const GatesCurve& curve,
                          const UniformBand& band, SelectionRule rule,
                          size_t index) {
  SubgroupReport r;
  r.rule = rule;
  r.alpha = band.alpha;
  r.index = index;
  r.p_selected = curve.grid[index];
  r.estimate = curve.values[index];
  r.guaranteed_lower = band.lower[index];
  // Grid index i holds p = (i + 1) / n, i.e. the top i + 1 units.
  r.selected_ids.reserve(index + 1);
  for (size_t rank = 0; rank <= index; ++rank) {
    r.selected_ids.push_back(sorted.unit_at_rank(static_cast<int64_t>(rank)).id);
  }
  return r;
}

absl::StatusOr<size_t> ConstrainedArgmax(const GatesCurve& curve,
                                         const std::vector<double>& objective,
                                         const GridConstraint& constraint) {
  std::optional<size_t> best;
  for (size_t i = 0; i < curve.size(); ++i) {
    const double p = curve.grid[i];
    if (p < constraint.p_min || p > constraint.p_max) continue;
    // >= so later (larger p) ties win.
    if (!best.has_value() || objective[i] >= objective[*best]) best = i;
  }
  if (!best.has_value()) {
    return absl::InvalidArgumentError(
        absl::StrCat("no grid point satisfies ", constraint.p_min,
                     " <= p <= ", constraint.p_max));
  }
  return *best;
}

}  // namespace

std::string SelectionRuleName(SelectionRule rule) {
  switch (rule) {
    case SelectionRule::kArgmaxLower:
      return "argmax_lower";
    case SelectionRule::kThreshold:
      return "threshold";
    case SelectionRule::kArgmaxPoint:
      return "argmax_point";
  }
  return "unknown";
}

GridConstraint DefaultConstraint(int64_t n, double p_l) {
  GridConstraint c;
  c.p_min = std::max(p_l, 5.0 / static_cast<double>(n));
  return c;
}

absl::StatusOr<SubgroupReport> SelectArgmaxLower(
    const SortedDataset& sorted, const GatesCurve& curve,
    const UniformBand& band, const GridConstraint& constraint) {
  if (auto s = CheckAligned(sorted, curve, band); !s.ok()) return s;
  auto index = ConstrainedArgmax(curve, band.lower, constraint);
  if (!index.ok()) return index.status();
  return MakeReport(sorted, curve, band, SelectionRule::kArgmaxLower, *index);
}

absl::StatusOr<SubgroupReport> SelectArgmaxPoint(
    const SortedDataset& sorted, const GatesCurve& curve,
    const UniformBand& band, const GridConstraint& constraint) {
  if (auto s = CheckAligned(sorted, curve, band); !s.ok()) return s;
  auto index = ConstrainedArgmax(curve, curve.values, constraint);
  if (!index.ok()) return index.status();
  return MakeReport(sorted, curve, band, SelectionRule::kArgmaxPoint, *index);
}

absl::StatusOr<std::optional<SubgroupReport>> SelectThreshold(
    const SortedDataset& sorted, const GatesCurve& curve,
    const UniformBand& band, double c) {
  if (auto s = CheckAligned(sorted, curve, band); !s.ok()) return s;
  for (size_t i = curve.size(); i-- > 0;) {
    if (band.lower[i] >= c) {
      SubgroupReport r =
          MakeReport(sorted, curve, band, SelectionRule::kThreshold, i);
      r.threshold = c;
      return std::optional<SubgroupReport>(std::move(r));
    }
  }
  return std::optional<SubgroupReport>();
}

absl::StatusOr<CharacterizationReport> Characterize(
    const SortedDataset& sorted, const std::vector<int>& covariates,
    const UniformBand& main_band, const BandCoefficients& coeffs) {
  if (coeffs.family == BandFamily::kBridge) {
    return absl::InvalidArgumentError(
        "covariate curves are not mean-adjusted; use a min-area or k-family "
        "band");
  }
  CharacterizationReport report;
  report.alpha = coeffs.alpha;
  const double m = static_cast<double>(covariates.size());
  report.joint_level = 1.0 - (m + 1.0) * coeffs.alpha;
  report.joint_level_two_sided = 1.0 - (2.0 * m + 1.0) * coeffs.alpha;
  report.main_lower = main_band.lower;

  for (int j : covariates) {
    if (j < 0 || j >= sorted.base.covariate_dim()) {
      return absl::OutOfRangeError(
          absl::StrCat("covariate index ", j, " outside [0, ",
                       sorted.base.covariate_dim(), ")"));
    }
    CovariateBounds b;
    b.covariate = j;
    const auto& names = sorted.base.covariate_names();
    b.name = names.empty() ? absl::StrCat("x", j)
                           : names[static_cast<size_t>(j)];
    auto curve = ComputeGatesCurve(sorted, StatisticFamily::Covariate(j));
    if (!curve.ok()) return curve.status();
    auto negated =
        ComputeGatesCurve(sorted, StatisticFamily::Covariate(j, true));
    if (!negated.ok()) return negated.status();
    auto lower = BandLowerBound(*curve, coeffs);
    if (!lower.ok()) return lower.status();
    auto neg_lower = BandLowerBound(*negated, coeffs);
    if (!neg_lower.ok()) return neg_lower.status();

    b.population_mean = curve->values.back();
    b.lower = std::move(lower->lower);
    b.upper.resize(neg_lower->lower.size());
    for (size_t i = 0; i < b.upper.size(); ++i) {
      b.upper[i] = -neg_lower->lower[i];
    }
    b.curve = std::move(*curve);
    report.covariates.push_back(std::move(b));
  }
  return report;
}

}  // namespace gatesband
