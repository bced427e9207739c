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

// Synthetic experiments with known GATES curves, coverage studies of the
// bands, and the sorted-effect correlation illustration.
//
// Two data generating processes are provided:
//
//   acic28          the additive polynomial outcome model used in the
//                   coverage study, with its eight covariates drawn as
//                   independent standard normals, N(0, 1) noise and a
//                   balanced completely randomized assignment
//   correlation(r)  Y(t) = X (1 + t), so the unit effect is X, with the
//                   built-in score S = r X + sqrt(1 - r^2) Z
//
// Scores are fixed functions of a unit's latent draw, so the true curve
// Psi(p) = E[effect | score in the top p] can be computed by brute force on a
// large population.

#ifndef GATESBAND_SIMULATION_H_
#define GATESBAND_SIMULATION_H_

#include <array>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "gatesband/band_calibration.h"
#include "gatesband/dataset.h"

namespace gatesband {

enum class DgpKind { kAcic28, kCorrelation };

std::string DgpKindName(DgpKind kind);  // "acic28" or "correlation"
absl::StatusOr<DgpKind> ParseDgpKind(const std::string& name);

struct DgpSpec {
  DgpKind kind = DgpKind::kCorrelation;
  double r = 0.5;  // correlation only
  int64_t n = 100;
  int64_t oracle_population = 2000000;
  uint64_t seed = 0;
};

// n >= 20 and even, |r| <= 1, oracle_population >= n.
absl::Status ValidateDgpSpec(const DgpSpec& spec);

// Covariate names of the outcome model, in storage order.
inline constexpr std::array<const char*, 8> kAcic28Covariates = {
    "x4", "x17", "x27", "x29", "x30", "x37", "x42", "x54"};

// E(Y(t) | x) of the acic28 model; `x` follows kAcic28Covariates.
double Acic28Mean(const std::array<double, 8>& x, int t);

// One unit before treatment assignment and outcome noise.
struct LatentUnit {
  std::vector<double> covariates;
  double hidden = 0.0;  // per-unit standard normal feeding noisy scores
  double mean0 = 0.0;   // E(Y(0) | x)
  double mean1 = 0.0;   // E(Y(1) | x)

  double effect() const { return mean1 - mean0; }
};

// Draws one latent unit from the spec's covariate law.
LatentUnit DrawLatent(const DgpSpec& spec, std::mt19937_64& rng);

enum class ScoreKind {
  // Effect plus noise. For correlation(r) this is the built-in score
  // r X + sqrt(1 - r^2) Z; for acic28 it is effect + noise_sd * Z.
  kNoisyOracle,
  // x'(b1 - b0) from per-arm least squares fits of Y on (1, x) over a
  // held-out sample of `fit_n` units.
  kLinearFit,
};

struct ScoreRule {
  ScoreKind kind = ScoreKind::kNoisyOracle;
  double noise_sd = 1.0;
  int64_t fit_n = 1000;
  uint64_t fit_seed = 1;
};

std::string ScoreKindName(ScoreKind kind);  // "noisy_oracle", "linear_fit"
absl::StatusOr<ScoreKind> ParseScoreKind(const std::string& name);

// A deterministic score of a latent unit.
using ScoreFunction = std::function<double(const LatentUnit&)>;

// Resolves a rule against a DGP (fitting the linear rule if needed).
absl::StatusOr<ScoreFunction> BuildScore(const DgpSpec& spec,
                                         const ScoreRule& rule);

struct GeneratedData {
  EvaluationDataset dataset;
  // E(Y(1) - Y(0) | x) for each unit, in dataset order.
  std::vector<double> true_effects;
};

// Draws spec.n units with spec.seed, assigns exactly n/2 to treatment and
// scores them with `score`.
absl::StatusOr<GeneratedData> Generate(const DgpSpec& spec,
                                       const ScoreFunction& score);

// Population GATES curve by brute force over spec.oracle_population units.
struct TrueCurve {
  std::vector<double> prefix_means;  // mean effect of the top k, k = 1..N

  double ate() const { return prefix_means.back(); }
  // Psi at the population grid point nearest to p (p in (0, 1]).
  double At(double p) const;
};

absl::StatusOr<TrueCurve> TrueGatesOracle(const DgpSpec& spec,
                                          const ScoreFunction& score);

struct CoverageConfig {
  DgpSpec dgp;
  ScoreRule score;
  int64_t replications = 500;
  double pointwise_inflation = 1.5;
  double selection_threshold = 0.0;
  // Width ratios average over grid points with p >= this value.
  double width_p_min = 0.05;
  // Coverage is checked at grid points with p >= this value; 0 checks the
  // whole curve.
  double coverage_p_min = 0.0;
  int workers = 0;
};

struct CoverageResult {
  int64_t replications = 0;
  double alpha = 0.0;
  std::string band_family;
  // Fraction of replications whose band lies below the true curve at every
  // grid point.
  double uniform = 0.0;
  double pointwise = 0.0;
  double pointwise_inflated = 0.0;
  // Mean over replications of (average uniform width) / (average pointwise
  // width), widths being estimate - lower over p >= width_p_min. Averaging
  // widths first keeps grid points where the plug-in variance nearly
  // vanishes from dominating.
  double width_ratio = 0.0;
  // Fraction of replications with Psi(p_selected) >= guaranteed_lower.
  double selection_argmax_lower = 0.0;
  double selection_threshold = 0.0;
  // Replications where no grid point cleared the threshold (counted as
  // covered: no claim was made).
  int64_t threshold_none = 0;
  double true_ate = 0.0;
};

// Binomial standard error of a coverage fraction.
double CoverageStandardError(double fraction, int64_t replications);

// Replication r uses seed StreamSeed(dgp.seed, r); results do not depend on
// the worker count. Bridge coefficients are scored against the mean-adjusted
// truth Psi(p) - p Psi(1).
absl::StatusOr<CoverageResult> CoverageStudy(const CoverageConfig& config,
                                             const BandCoefficients& coeffs);

struct CorrelationDemoConfig {
  std::vector<double> r_grid;
  int64_t n = 100;
  int64_t trials = 10000;
  uint64_t seed = 0;
  int workers = 0;
};

// Mean over i of Cov(effect of rank i, effect of rank i + 1) across trials,
// with a linearization standard error. Two effect proxies are reported:
// the true unit effects X (the concomitants of the score) and the IPW
// estimates from a balanced randomized assignment.
struct CorrelationRow {
  double r = 0.0;
  double mean_cov = 0.0;
  double se = 0.0;
  double mean_cov_ipw = 0.0;
  double se_ipw = 0.0;
};

absl::StatusOr<std::vector<CorrelationRow>> CorrelationDemo(
    const CorrelationDemoConfig& config);

}  // namespace gatesband

#endif  // GATESBAND_SIMULATION_H_
