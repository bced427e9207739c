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

#include "gatesband/estimator.h"

#include <algorithm>
#include <cmath>

#include "absl/strings/str_cat.h"
#include "gatesband/distributions.h"

namespace gatesband {

namespace {

// Relative floor applied to every plug-in variance.
constexpr double kVarianceFloor = 1e-12;

// Running first and second moments of one arm's selected outcomes.
struct ArmSums {
  long double sum = 0;
  long double sum_sq = 0;

  void Add(double y) {
    sum += y;
    sum_sq += static_cast<long double>(y) * y;
  }
};

// Sample variance (divisor m - 1) of m values that are `sums` on the selected
// units and zero elsewhere.
double ZeroPaddedVariance(const ArmSums& sums, int64_t m) {
  const long double v = (sums.sum_sq - sums.sum * sums.sum / m) / (m - 1);
  return static_cast<double>(v);
}

double MaxAbs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

absl::Status CheckFamily(const SortedDataset& sorted,
                         const StatisticFamily& family) {
  const bool is_cost = family.kind == StatisticKind::kCostAdjusted;
  if (is_cost != family.cost.has_value()) {
    return absl::InvalidArgumentError(
        "a cost model is required for, and only for, the cost-adjusted "
        "family");
  }
  if (is_cost && !family.cost->fn) {
    return absl::InvalidArgumentError("empty cost function");
  }
  if (family.kind == StatisticKind::kCovariate &&
      (family.covariate < 0 ||
       family.covariate >= sorted.base.covariate_dim())) {
    return absl::OutOfRangeError(
        absl::StrCat("covariate index ", family.covariate, " outside [0, ",
                     sorted.base.covariate_dim(), ")"));
  }
  return absl::OkStatus();
}

struct CurveParts {
  std::vector<double> values;
  std::vector<double> variances;
  std::vector<double> process_variances;
};

// Plain and cost-adjusted curves. With no cost this is the plain curve.
absl::StatusOr<CurveParts> EffectCurve(const SortedDataset& sorted,
                                       const std::optional<CostModel>& cost) {
  const int64_t n = sorted.n();
  const int64_t n1 = sorted.base.n1();
  const int64_t n0 = sorted.base.n0();
  const std::vector<double> ite = IteEstimates(sorted);

  auto unit_cost = [&](int64_t rank, double p) -> absl::StatusOr<double> {
    const UnitRecord& u = sorted.unit_at_rank(rank);
    const double c = cost->fn(u.covariates, p);
    if (!std::isfinite(c)) {
      return absl::InvalidArgumentError(
          absl::StrCat("cost function returned a non-finite value for unit ",
                       u.id));
    }
    return c;
  };

  std::vector<double> fixed_cost;
  if (cost.has_value() && !cost->depends_on_p) {
    fixed_cost.resize(static_cast<size_t>(n));
    for (int64_t r = 0; r < n; ++r) {
      auto c = unit_cost(r, 1.0);
      if (!c.ok()) return c.status();
      fixed_cost[static_cast<size_t>(r)] = *c;
    }
  }

  CurveParts out;
  out.values.resize(static_cast<size_t>(n));
  out.variances.resize(static_cast<size_t>(n));
  double scale = MaxAbs(ite);

  ArmSums treated, control;
  long double prefix = 0;
  for (int64_t i = 1; i <= n; ++i) {
    const double p = static_cast<double>(i) / static_cast<double>(n);
    double value = 0.0;
    if (cost.has_value() && cost->depends_on_p) {
      // The statistic of every selected unit changes with p: rebuild sums.
      treated = ArmSums();
      control = ArmSums();
      long double total = 0;
      for (int64_t r = 0; r < i; ++r) {
        auto c = unit_cost(r, p);
        if (!c.ok()) return c.status();
        const UnitRecord& u = sorted.unit_at_rank(r);
        total += ite[static_cast<size_t>(r)] - *c;
        scale = std::max(scale, std::abs(ite[static_cast<size_t>(r)] - *c));
        if (u.treatment == 1) {
          treated.Add(u.outcome - *c);
        } else {
          control.Add(u.outcome);
        }
      }
      value = static_cast<double>(total / i);
    } else {
      const int64_t r = i - 1;
      const UnitRecord& u = sorted.unit_at_rank(r);
      const double c = fixed_cost.empty() ? 0.0 : fixed_cost[static_cast<size_t>(r)];
      prefix += ite[static_cast<size_t>(r)] - c;
      if (c != 0.0) {
        scale = std::max(scale, std::abs(ite[static_cast<size_t>(r)] - c));
      }
      if (u.treatment == 1) {
        treated.Add(u.outcome - c);
      } else {
        control.Add(u.outcome);
      }
      value = static_cast<double>(prefix / i);
    }
    const double s1 = ZeroPaddedVariance(treated, n1);
    const double s0 = ZeroPaddedVariance(control, n0);
    const double v =
        (s1 / static_cast<double>(n1) + s0 / static_cast<double>(n0) -
         p * (1.0 - p) / static_cast<double>(n - 1) * value * value) /
        (p * p);
    out.values[static_cast<size_t>(i - 1)] = value;
    out.variances[static_cast<size_t>(i - 1)] = v;
  }
  const double floor = kVarianceFloor * scale * scale;
  for (double& v : out.variances) v = std::max(v, floor);
  out.process_variances = out.variances;
  return out;
}

// Mean-adjusted curve: Psi(p) - (i/n) Psi(1). Its variance is the plug-in
// variance of the weighted statistic (1{rank <= np} - p) * psi, whose
// finite-population correction term is p(1-p)/(n-1) * ((1-p) Psi_sel +
// p Psi_unsel)^2.
CurveParts MeanAdjustedCurve(const SortedDataset& sorted,
                             const CurveParts& plain) {
  const int64_t n = sorted.n();
  const int64_t n1 = sorted.base.n1();
  const int64_t n0 = sorted.base.n0();
  const std::vector<double> ite = IteEstimates(sorted);
  const double overall = plain.values.back();

  ArmSums all_treated, all_control;
  for (const UnitRecord& u : sorted.base.units()) {
    (u.treatment == 1 ? all_treated : all_control).Add(u.outcome);
  }

  CurveParts out;
  out.values.resize(static_cast<size_t>(n));
  out.variances.resize(static_cast<size_t>(n));
  ArmSums treated, control;
  for (int64_t i = 1; i <= n; ++i) {
    const double p = static_cast<double>(i) / static_cast<double>(n);
    const UnitRecord& u = sorted.unit_at_rank(i - 1);
    (u.treatment == 1 ? treated : control).Add(u.outcome);

    const size_t at = static_cast<size_t>(i - 1);
    out.values[at] =
        plain.values[at] - static_cast<double>(i) / static_cast<double>(n) * overall;

    // Moments of w * Y with w = 1 - p on selected units and -p elsewhere.
    auto weighted_variance = [&](const ArmSums& sel, const ArmSums& all,
                                 int64_t m) {
      const long double lp = p;
      const long double sum = sel.sum - lp * all.sum;
      const long double sum_sq = (1 - lp) * (1 - lp) * sel.sum_sq +
                                 lp * lp * (all.sum_sq - sel.sum_sq);
      return static_cast<double>((sum_sq - sum * sum / m) / (m - 1));
    };
    const double s1 = weighted_variance(treated, all_treated, n1);
    const double s0 = weighted_variance(control, all_control, n0);
    const double psi_sel = plain.values[at];
    const double psi_unsel =
        i == n ? 0.0
               : (static_cast<double>(n) * overall -
                  static_cast<double>(i) * psi_sel) /
                     static_cast<double>(n - i);
    const double mix = (1.0 - p) * psi_sel + p * psi_unsel;
    out.variances[at] =
        (s1 / static_cast<double>(n1) + s0 / static_cast<double>(n0) -
         p * (1.0 - p) / static_cast<double>(n - 1) * mix * mix) /
        (p * p);
  }
  const double scale = MaxAbs(ite);
  const double floor = kVarianceFloor * scale * scale;
  for (double& v : out.variances) v = std::max(v, floor);
  out.process_variances = plain.variances;
  return out;
}

// Prefix means of +-X_j. No treatment weighting: the variance is that of a
// mean over all n units, with the same finite-selection correction.
CurveParts CovariateCurve(const SortedDataset& sorted, int j, bool negate) {
  const int64_t n = sorted.n();
  const double sign = negate ? -1.0 : 1.0;
  CurveParts out;
  out.values.resize(static_cast<size_t>(n));
  out.variances.resize(static_cast<size_t>(n));
  ArmSums sums;
  double scale = 0.0;
  for (int64_t i = 1; i <= n; ++i) {
    const double p = static_cast<double>(i) / static_cast<double>(n);
    const double x =
        sign * sorted.unit_at_rank(i - 1).covariates[static_cast<size_t>(j)];
    scale = std::max(scale, std::abs(x));
    sums.Add(x);
    const double value = static_cast<double>(sums.sum / i);
    const double s = ZeroPaddedVariance(sums, n);
    out.values[static_cast<size_t>(i - 1)] = value;
    out.variances[static_cast<size_t>(i - 1)] =
        (s / static_cast<double>(n) -
         p * (1.0 - p) / static_cast<double>(n - 1) * value * value) /
        (p * p);
  }
  const double floor = kVarianceFloor * scale * scale;
  for (double& v : out.variances) v = std::max(v, floor);
  out.process_variances = out.variances;
  return out;
}

absl::StatusOr<CurveParts> ComputeParts(const SortedDataset& sorted,
                                        const StatisticFamily& family) {
  if (auto s = CheckFamily(sorted, family); !s.ok()) return s;
  switch (family.kind) {
    case StatisticKind::kPlain:
      return EffectCurve(sorted, std::nullopt);
    case StatisticKind::kCostAdjusted:
      return EffectCurve(sorted, family.cost);
    case StatisticKind::kMeanAdjusted: {
      auto plain = EffectCurve(sorted, std::nullopt);
      if (!plain.ok()) return plain.status();
      return MeanAdjustedCurve(sorted, *plain);
    }
    case StatisticKind::kCovariate:
      return CovariateCurve(sorted, family.covariate, family.negate);
  }
  return absl::InternalError("unknown statistic kind");
}

}  // namespace

std::string StatisticFamily::Name() const {
  switch (kind) {
    case StatisticKind::kPlain:
      return "plain";
    case StatisticKind::kCostAdjusted:
      return "cost_adjusted";
    case StatisticKind::kMeanAdjusted:
      return "mean_adjusted";
    case StatisticKind::kCovariate:
      return absl::StrCat(negate ? "neg_covariate(" : "covariate(", covariate,
                          ")");
  }
  return "unknown";
}

absl::StatusOr<size_t> GatesCurve::IndexAt(double p) const {
  if (grid.empty()) return absl::FailedPreconditionError("empty curve");
  if (!(p <= 1.0)) {
    return absl::OutOfRangeError(absl::StrCat("p=", p, " exceeds 1"));
  }
  // Largest i with i/n <= p; guard against p*n landing just below an integer.
  int64_t i = static_cast<int64_t>(std::floor(p * static_cast<double>(n)));
  if (i < n && grid[static_cast<size_t>(i)] <= p) ++i;
  while (i > 0 && grid[static_cast<size_t>(i - 1)] > p) --i;
  if (i < 1) {
    return absl::OutOfRangeError(
        absl::StrCat("p=", p, " is below the first grid point 1/", n));
  }
  return static_cast<size_t>(i - 1);
}

std::vector<double> IteEstimates(const SortedDataset& sorted) {
  const double n = static_cast<double>(sorted.n());
  const double share1 = static_cast<double>(sorted.base.n1()) / n;
  const double share0 = static_cast<double>(sorted.base.n0()) / n;
  std::vector<double> out(static_cast<size_t>(sorted.n()));
  for (int64_t r = 0; r < sorted.n(); ++r) {
    const UnitRecord& u = sorted.unit_at_rank(r);
    out[static_cast<size_t>(r)] =
        u.treatment == 1 ? u.outcome / share1 : -u.outcome / share0;
  }
  return out;
}

absl::StatusOr<GatesCurve> ComputeGatesCurve(const SortedDataset& sorted,
                                             const StatisticFamily& family) {
  auto parts = ComputeParts(sorted, family);
  if (!parts.ok()) return parts.status();
  GatesCurve curve;
  const int64_t n = sorted.n();
  curve.grid.resize(static_cast<size_t>(n));
  for (int64_t i = 1; i <= n; ++i) {
    curve.grid[static_cast<size_t>(i - 1)] =
        static_cast<double>(i) / static_cast<double>(n);
  }
  curve.values = std::move(parts->values);
  curve.variances = std::move(parts->variances);
  curve.process_variances = std::move(parts->process_variances);
  curve.family = family;
  curve.n = n;
  curve.n1 = sorted.base.n1();
  curve.n0 = sorted.base.n0();
  return curve;
}

absl::StatusOr<std::vector<double>> GatesVariance(
    const SortedDataset& sorted, const StatisticFamily& family) {
  auto parts = ComputeParts(sorted, family);
  if (!parts.ok()) return parts.status();
  return std::move(parts->variances);
}

absl::StatusOr<std::vector<double>> PointwiseBand(const GatesCurve& curve,
                                                  double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("alpha must lie in (0, 1), got ", alpha));
  }
  const double z = StandardNormalQuantile(1.0 - alpha);
  std::vector<double> lower(curve.size());
  for (size_t i = 0; i < curve.size(); ++i) {
    lower[i] = curve.values[i] - z * std::sqrt(curve.variances[i]);
  }
  return lower;
}

}  // namespace gatesband
