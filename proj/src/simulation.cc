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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include <Eigen/Dense>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>

#include "absl/strings/str_cat.h"
#include "gatesband/estimator.h"
#include "gatesband/parallel.h"
#include "gatesband/seeding.h"
#include "gatesband/selection.h"

namespace gatesband {

namespace {

constexpr int64_t kMinSampleSize = 20;
constexpr int64_t kMinDemoTrials = 1000;
// Stream index of the oracle population under a spec's seed.
constexpr int64_t kOracleStream = -1;

using Normal = boost::random::normal_distribution<double>;

double Indicator(bool condition) { return condition ? 1.0 : 0.0; }

// Balanced complete randomization: a uniform shuffle of n/2 ones.
std::vector<int> BalancedAssignment(int64_t n, std::mt19937_64& rng) {
  std::vector<int> t(static_cast<size_t>(n), 0);
  std::fill(t.begin(), t.begin() + n / 2, 1);
  for (int64_t i = n - 1; i > 0; --i) {
    boost::random::uniform_int_distribution<int64_t> pick(0, i);
    std::swap(t[static_cast<size_t>(i)], t[static_cast<size_t>(pick(rng))]);
  }
  return t;
}

// Observed outcome given assignment; acic28 adds N(0, 1) noise.
double DrawOutcome(const DgpSpec& spec, const LatentUnit& u, int t,
                   std::mt19937_64& rng) {
  const double mean = t == 1 ? u.mean1 : u.mean0;
  if (spec.kind == DgpKind::kCorrelation) return mean;
  Normal normal;
  return mean + normal(rng);
}

std::vector<std::string> CovariateNames(const DgpSpec& spec) {
  if (spec.kind == DgpKind::kCorrelation) return {"x"};
  return std::vector<std::string>(kAcic28Covariates.begin(),
                                  kAcic28Covariates.end());
}

absl::StatusOr<ScoreFunction> FitLinearScore(const DgpSpec& spec,
                                             const ScoreRule& rule) {
  const int dim = spec.kind == DgpKind::kCorrelation ? 1 : 8;
  const int64_t needed = 4 * (dim + 1);
  if (rule.fit_n < needed || rule.fit_n % 2 != 0) {
    return absl::InvalidArgumentError(absl::StrCat(
        "linear score needs an even fit sample of at least ", needed,
        " units, got ", rule.fit_n));
  }
  std::mt19937_64 rng(rule.fit_seed);
  std::vector<LatentUnit> units;
  units.reserve(static_cast<size_t>(rule.fit_n));
  for (int64_t i = 0; i < rule.fit_n; ++i) {
    units.push_back(DrawLatent(spec, rng));
  }
  const std::vector<int> t = BalancedAssignment(rule.fit_n, rng);

  std::array<Eigen::VectorXd, 2> coef;
  for (int arm = 0; arm < 2; ++arm) {
    const int64_t rows = rule.fit_n / 2;
    Eigen::MatrixXd design(rows, dim + 1);
    Eigen::VectorXd y(rows);
    int64_t row = 0;
    for (size_t i = 0; i < units.size(); ++i) {
      if (t[i] != arm) continue;
      design(row, 0) = 1.0;
      for (int j = 0; j < dim; ++j) {
        design(row, j + 1) = units[i].covariates[static_cast<size_t>(j)];
      }
      y(row) = DrawOutcome(spec, units[i], arm, rng);
      ++row;
    }
    coef[static_cast<size_t>(arm)] = design.colPivHouseholderQr().solve(y);
  }
  Eigen::VectorXd diff = coef[1] - coef[0];
  std::vector<double> w(diff.data(), diff.data() + diff.size());
  return ScoreFunction([w](const LatentUnit& u) {
    double s = w[0];
    for (size_t j = 0; j < u.covariates.size(); ++j) {
      s += w[j + 1] * u.covariates[j];
    }
    return s;
  });
}

struct ReplicationOutcome {
  absl::Status status;
  bool uniform = false;
  bool pointwise = false;
  bool pointwise_inflated = false;
  double width_ratio = 0.0;
  bool argmax_lower_ok = false;
  bool threshold_ok = false;
  bool threshold_none = false;
};

ReplicationOutcome RunReplication(const CoverageConfig& config,
                                  const BandCoefficients& coeffs,
                                  const ScoreFunction& score,
                                  const TrueCurve& truth, int64_t rep) {
  ReplicationOutcome out;
  DgpSpec spec = config.dgp;
  spec.seed = StreamSeed(config.dgp.seed, rep);
  auto data = Generate(spec, score);
  if (!data.ok()) {
    out.status = data.status();
    return out;
  }
  const SortedDataset sorted = SortByScore(data->dataset);
  const bool bridge = coeffs.family == BandFamily::kBridge;
  auto curve = ComputeGatesCurve(sorted, bridge ? StatisticFamily::MeanAdjusted()
                                                : StatisticFamily::Plain());
  if (!curve.ok()) {
    out.status = curve.status();
    return out;
  }
  auto band = BandLowerBound(*curve, coeffs);
  if (!band.ok()) {
    out.status = band.status();
    return out;
  }
  auto pointwise = PointwiseBand(*curve, coeffs.alpha);
  if (!pointwise.ok()) {
    out.status = pointwise.status();
    return out;
  }

  const size_t m = curve->size();
  std::vector<double> target(m);
  for (size_t i = 0; i < m; ++i) {
    const double p = curve->grid[i];
    target[i] = truth.At(p) - (bridge ? p * truth.ate() : 0.0);
  }

  out.uniform = out.pointwise = out.pointwise_inflated = true;
  double uniform_width = 0.0;
  double pointwise_width = 0.0;
  for (size_t i = 0; i < m; ++i) {
    const double v = curve->values[i];
    const double pw_width = v - (*pointwise)[i];
    const double inflated = v - config.pointwise_inflation * pw_width;
    if (curve->grid[i] >= config.coverage_p_min) {
      if (band->lower[i] > target[i]) out.uniform = false;
      if ((*pointwise)[i] > target[i]) out.pointwise = false;
      if (inflated > target[i]) out.pointwise_inflated = false;
    }
    if (curve->grid[i] >= config.width_p_min) {
      uniform_width += v - band->lower[i];
      pointwise_width += pw_width;
    }
  }
  out.width_ratio =
      pointwise_width > 0.0 ? uniform_width / pointwise_width : 0.0;

  auto chosen = SelectArgmaxLower(sorted, *curve, *band,
                                  DefaultConstraint(sorted.n(), coeffs.p_l));
  if (!chosen.ok()) {
    out.status = chosen.status();
    return out;
  }
  out.argmax_lower_ok = target[chosen->index] >= chosen->guaranteed_lower;

  auto above =
      SelectThreshold(sorted, *curve, *band, config.selection_threshold);
  if (!above.ok()) {
    out.status = above.status();
    return out;
  }
  if (above->has_value()) {
    out.threshold_ok =
        target[(*above)->index] >= (*above)->guaranteed_lower;
  } else {
    out.threshold_none = true;
    out.threshold_ok = true;
  }
  return out;
}

// Mean adjacent covariance of a trials x n matrix (row-major) and its
// linearization standard error.
std::pair<double, double> AdjacentCovariance(const std::vector<double>& m,
                                             int64_t trials, int64_t n) {
  std::vector<long double> mean(static_cast<size_t>(n), 0.0L);
  for (int64_t t = 0; t < trials; ++t) {
    for (int64_t i = 0; i < n; ++i) {
      mean[static_cast<size_t>(i)] += m[static_cast<size_t>(t * n + i)];
    }
  }
  for (auto& v : mean) v /= static_cast<long double>(trials);

  std::vector<double> h(static_cast<size_t>(trials));
  long double total = 0.0L;
  for (int64_t t = 0; t < trials; ++t) {
    long double s = 0.0L;
    const double* row = &m[static_cast<size_t>(t * n)];
    for (int64_t i = 0; i + 1 < n; ++i) {
      s += (row[i] - mean[static_cast<size_t>(i)]) *
           (row[i + 1] - mean[static_cast<size_t>(i + 1)]);
    }
    h[static_cast<size_t>(t)] = static_cast<double>(s / (n - 1));
    total += h[static_cast<size_t>(t)];
  }
  const double estimate = static_cast<double>(total / (trials - 1));
  const long double h_mean = total / trials;
  long double ss = 0.0L;
  for (double v : h) ss += (v - h_mean) * (v - h_mean);
  const double sd = std::sqrt(static_cast<double>(ss / (trials - 1)));
  return {estimate, sd / std::sqrt(static_cast<double>(trials))};
}

}  // namespace

std::string DgpKindName(DgpKind kind) {
  return kind == DgpKind::kAcic28 ? "acic28" : "correlation";
}

absl::StatusOr<DgpKind> ParseDgpKind(const std::string& name) {
  if (name == "acic28") return DgpKind::kAcic28;
  if (name == "correlation") return DgpKind::kCorrelation;
  return absl::InvalidArgumentError(
      absl::StrCat("unknown dgp \"", name, "\" (acic28, correlation)"));
}

std::string ScoreKindName(ScoreKind kind) {
  return kind == ScoreKind::kNoisyOracle ? "noisy_oracle" : "linear_fit";
}

absl::StatusOr<ScoreKind> ParseScoreKind(const std::string& name) {
  if (name == "noisy_oracle" || name == "noisy-oracle") {
    return ScoreKind::kNoisyOracle;
  }
  if (name == "linear_fit" || name == "linear-fit" || name == "linear") {
    return ScoreKind::kLinearFit;
  }
  return absl::InvalidArgumentError(absl::StrCat(
      "unknown score rule \"", name, "\" (noisy_oracle, linear_fit)"));
}

absl::Status ValidateDgpSpec(const DgpSpec& spec) {
  if (spec.n < kMinSampleSize) {
    return absl::InvalidArgumentError(
        absl::StrCat("n must be at least ", kMinSampleSize, ", got ", spec.n));
  }
  if (spec.n % 2 != 0) {
    return absl::InvalidArgumentError(absl::StrCat(
        "balanced assignment needs an even n, got ", spec.n));
  }
  if (!(std::abs(spec.r) <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("r must lie in [-1, 1], got ", spec.r));
  }
  if (spec.oracle_population < spec.n) {
    return absl::InvalidArgumentError(
        absl::StrCat("oracle population ", spec.oracle_population,
                     " is smaller than n = ", spec.n));
  }
  return absl::OkStatus();
}

double Acic28Mean(const std::array<double, 8>& x, int t) {
  const double x4 = x[0], x17 = x[1], x27 = x[2], x29 = x[3], x30 = x[4],
               x37 = x[5], x42 = x[6], x54 = x[7];
  const double t1 = Indicator(t == 1);
  const double t0 = Indicator(t == 0);
  double m = 1.60 + 0.53 * x29 - 3.80 * x29 * (x29 - 0.98) * (x29 + 0.86) -
             0.32 * Indicator(x17 > 0);
  m += 0.21 * Indicator(x42 > 0) - 0.63 * x27 + 4.68 * Indicator(x27 < -0.61) -
       0.39 * (x27 + 0.91) * Indicator(x27 < -0.91);
  m += 0.75 * Indicator(x30 <= 0) - 1.22 * Indicator(x54 <= 0) +
       0.11 * x37 * Indicator(x4 <= 0) - 0.71 * Indicator(x17 <= 0) * t0;
  m += -1.82 * Indicator(x42 <= 0) * t1 + 0.28 * Indicator(x30 <= 0) * t0;
  m += (0.58 * x29 - 9.42 * x29 * (x29 - 0.67) * (x29 + 0.34)) * t1;
  m += (0.44 * x27 - 4.87 * Indicator(x27 < -0.80)) * t0 -
       2.54 * t0 * Indicator(x54 <= 0);
  return m;
}

LatentUnit DrawLatent(const DgpSpec& spec, std::mt19937_64& rng) {
  Normal normal;
  LatentUnit u;
  if (spec.kind == DgpKind::kCorrelation) {
    const double x = normal(rng);
    u.covariates = {x};
    u.hidden = normal(rng);
    u.mean0 = x;
    u.mean1 = 2.0 * x;
    return u;
  }
  std::array<double, 8> x;
  for (double& v : x) v = normal(rng);
  u.covariates.assign(x.begin(), x.end());
  u.hidden = normal(rng);
  u.mean0 = Acic28Mean(x, 0);
  u.mean1 = Acic28Mean(x, 1);
  return u;
}

absl::StatusOr<ScoreFunction> BuildScore(const DgpSpec& spec,
                                         const ScoreRule& rule) {
  if (auto s = ValidateDgpSpec(spec); !s.ok()) return s;
  if (rule.kind == ScoreKind::kLinearFit) return FitLinearScore(spec, rule);
  if (spec.kind == DgpKind::kCorrelation) {
    const double r = spec.r;
    const double rest = std::sqrt(std::max(0.0, 1.0 - r * r));
    return ScoreFunction([r, rest](const LatentUnit& u) {
      return r * u.covariates[0] + rest * u.hidden;
    });
  }
  if (!(rule.noise_sd >= 0.0) || !std::isfinite(rule.noise_sd)) {
    return absl::InvalidArgumentError(
        absl::StrCat("noise_sd must be finite and >= 0, got ", rule.noise_sd));
  }
  const double sd = rule.noise_sd;
  return ScoreFunction(
      [sd](const LatentUnit& u) { return u.effect() + sd * u.hidden; });
}

absl::StatusOr<GeneratedData> Generate(const DgpSpec& spec,
                                       const ScoreFunction& score) {
  if (auto s = ValidateDgpSpec(spec); !s.ok()) return s;
  std::mt19937_64 rng(spec.seed);
  std::vector<LatentUnit> latent;
  latent.reserve(static_cast<size_t>(spec.n));
  for (int64_t i = 0; i < spec.n; ++i) latent.push_back(DrawLatent(spec, rng));
  const std::vector<int> t = BalancedAssignment(spec.n, rng);

  GeneratedData out;
  std::vector<UnitRecord> units(static_cast<size_t>(spec.n));
  out.true_effects.resize(units.size());
  for (size_t i = 0; i < units.size(); ++i) {
    UnitRecord& u = units[i];
    u.id = std::to_string(i + 1);
    u.treatment = t[i];
    u.outcome = DrawOutcome(spec, latent[i], t[i], rng);
    u.score = score(latent[i]);
    u.covariates = latent[i].covariates;
    out.true_effects[i] = latent[i].effect();
  }
  auto dataset = MakeDataset(std::move(units), spec.seed, CovariateNames(spec));
  if (!dataset.ok()) return dataset.status();
  out.dataset = std::move(*dataset);
  return out;
}

double TrueCurve::At(double p) const {
  const int64_t size = static_cast<int64_t>(prefix_means.size());
  int64_t k = std::llround(p * static_cast<double>(size));
  k = std::clamp<int64_t>(k, 1, size);
  return prefix_means[static_cast<size_t>(k - 1)];
}

absl::StatusOr<TrueCurve> TrueGatesOracle(const DgpSpec& spec,
                                          const ScoreFunction& score) {
  if (auto s = ValidateDgpSpec(spec); !s.ok()) return s;
  const size_t size = static_cast<size_t>(spec.oracle_population);
  std::vector<std::pair<double, double>> scored;  // (score, effect)
  try {
    scored.reserve(size);
  } catch (const std::bad_alloc&) {
    return absl::ResourceExhaustedError(absl::StrCat(
        "cannot allocate an oracle population of ", spec.oracle_population));
  }
  std::mt19937_64 rng(StreamSeed(spec.seed, kOracleStream));
  for (size_t i = 0; i < size; ++i) {
    const LatentUnit u = DrawLatent(spec, rng);
    scored.emplace_back(score(u), u.effect());
  }
  std::stable_sort(scored.begin(), scored.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  TrueCurve curve;
  curve.prefix_means.resize(size);
  long double sum = 0.0L;
  for (size_t k = 0; k < size; ++k) {
    sum += scored[k].second;
    curve.prefix_means[k] = static_cast<double>(sum / (k + 1));
  }
  return curve;
}

double CoverageStandardError(double fraction, int64_t replications) {
  if (replications <= 0) return 0.0;
  return std::sqrt(fraction * (1.0 - fraction) /
                   static_cast<double>(replications));
}

absl::StatusOr<CoverageResult> CoverageStudy(const CoverageConfig& config,
                                             const BandCoefficients& coeffs) {
  if (config.replications < 1) {
    return absl::InvalidArgumentError("replications must be at least 1");
  }
  if (!(config.pointwise_inflation >= 1.0)) {
    return absl::InvalidArgumentError("pointwise inflation must be >= 1");
  }
  auto score = BuildScore(config.dgp, config.score);
  if (!score.ok()) return score.status();
  auto truth = TrueGatesOracle(config.dgp, *score);
  if (!truth.ok()) return truth.status();

  std::vector<ReplicationOutcome> outcomes(
      static_cast<size_t>(config.replications));
  ParallelFor(config.replications, config.workers,
              [&](int64_t begin, int64_t end) {
                for (int64_t r = begin; r < end; ++r) {
                  outcomes[static_cast<size_t>(r)] =
                      RunReplication(config, coeffs, *score, *truth, r);
                }
              });

  CoverageResult result;
  result.replications = config.replications;
  result.alpha = coeffs.alpha;
  result.band_family = BandFamilyName(coeffs.family);
  result.true_ate = truth->ate();
  int64_t uniform = 0, pointwise = 0, inflated = 0, argmax = 0, threshold = 0;
  double ratio = 0.0;
  for (const auto& o : outcomes) {
    if (!o.status.ok()) return o.status;
    uniform += o.uniform;
    pointwise += o.pointwise;
    inflated += o.pointwise_inflated;
    argmax += o.argmax_lower_ok;
    threshold += o.threshold_ok;
    result.threshold_none += o.threshold_none;
    ratio += o.width_ratio;
  }
  const double reps = static_cast<double>(config.replications);
  result.uniform = uniform / reps;
  result.pointwise = pointwise / reps;
  result.pointwise_inflated = inflated / reps;
  result.selection_argmax_lower = argmax / reps;
  result.selection_threshold = threshold / reps;
  result.width_ratio = ratio / reps;
  return result;
}

absl::StatusOr<std::vector<CorrelationRow>> CorrelationDemo(
    const CorrelationDemoConfig& config) {
  if (config.trials < kMinDemoTrials) {
    return absl::InvalidArgumentError(absl::StrCat(
        "trials must be at least ", kMinDemoTrials, ", got ", config.trials));
  }
  if (config.n < 4 || config.n % 2 != 0) {
    return absl::InvalidArgumentError(
        absl::StrCat("n must be even and at least 4, got ", config.n));
  }
  if (config.r_grid.empty()) {
    return absl::InvalidArgumentError("empty r grid");
  }
  for (double r : config.r_grid) {
    if (!(std::abs(r) <= 1.0)) {
      return absl::InvalidArgumentError(
          absl::StrCat("r must lie in [-1, 1], got ", r));
    }
  }

  const int64_t n = config.n;
  const int64_t trials = config.trials;
  const double weight1 = static_cast<double>(n) / (n / 2);
  std::vector<CorrelationRow> rows;
  std::vector<double> sorted_true(static_cast<size_t>(trials * n));
  std::vector<double> sorted_ipw(sorted_true.size());
  for (size_t k = 0; k < config.r_grid.size(); ++k) {
    const double r = config.r_grid[k];
    const double rest = std::sqrt(std::max(0.0, 1.0 - r * r));
    const uint64_t r_seed =
        StreamSeed(config.seed, static_cast<int64_t>(k));
    ParallelFor(trials, config.workers, [&](int64_t begin, int64_t end) {
      Normal normal;
      std::vector<double> x(static_cast<size_t>(n)), s(x.size());
      std::vector<int64_t> order(x.size());
      for (int64_t t = begin; t < end; ++t) {
        std::mt19937_64 rng(StreamSeed(r_seed, t));
        for (size_t i = 0; i < x.size(); ++i) {
          x[i] = normal(rng);
          s[i] = r * x[i] + rest * normal(rng);
        }
        const std::vector<int> assign = BalancedAssignment(n, rng);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int64_t a, int64_t b) {
          return s[static_cast<size_t>(a)] > s[static_cast<size_t>(b)];
        });
        double* row_true = &sorted_true[static_cast<size_t>(t * n)];
        double* row_ipw = &sorted_ipw[static_cast<size_t>(t * n)];
        for (int64_t rank = 0; rank < n; ++rank) {
          const size_t u = static_cast<size_t>(order[static_cast<size_t>(rank)]);
          row_true[rank] = x[u];
          // Y(t) = X (1 + t).
          const double y = x[u] * (1.0 + assign[u]);
          row_ipw[rank] = assign[u] == 1 ? weight1 * y : -weight1 * y;
        }
      }
    });
    CorrelationRow row;
    row.r = r;
    std::tie(row.mean_cov, row.se) = AdjacentCovariance(sorted_true, trials, n);
    std::tie(row.mean_cov_ipw, row.se_ipw) =
        AdjacentCovariance(sorted_ipw, trials, n);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace gatesband
