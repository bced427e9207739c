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

// Calibration of uniform one-sided band coefficients and their application to
// GATES curves.
//
// Three boundary families are supported:
//
//   min_area(p_l)  beta0 + beta1 sqrt(t), minimizing the band area over
//                  [p_l, 1] subject to P(W(t) <= b(t) for all t) >= 1 - alpha
//   k_family(k)    gamma t^k, 0 <= k < 1/2, with the smallest feasible gamma
//   bridge         delta0 + delta1 sqrt(t(1-t)) against the Brownian bridge,
//                  for mean-adjusted curves
//
// Every search evaluates feasibility on one frozen path batch, so the
// feasible sets are exactly monotone in the coefficients. The coefficients
// are then re-checked on an independent batch by ValidateCoefficients().

#ifndef GATESBAND_BAND_CALIBRATION_H_
#define GATESBAND_BAND_CALIBRATION_H_

#include <cstdint>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "gatesband/estimator.h"
#include "gatesband/process_engine.h"

namespace gatesband {

enum class BandFamily { kMinArea, kKFamily, kBridge };

// "min_area", "k_family", "bridge".
std::string BandFamilyName(BandFamily family);
absl::StatusOr<BandFamily> ParseBandFamily(const std::string& name);

struct BandCoefficients {
  BandFamily family = BandFamily::kMinArea;
  double alpha = 0.05;
  double p_l = 0.0;  // min_area only
  double k = 0.0;    // k_family only
  // (beta0, beta1), (gamma, unused) or (delta0, delta1).
  double c0 = 0.0;
  double c1 = 0.0;
  // Line-searched corner: smallest constant boundary that is feasible
  // (beta0-bar or delta0-bar). Zero for the k-family.
  double corner = 0.0;
  double step = 0.005;
  int64_t trials = 0;
  int64_t grid_points = 0;
  uint64_t seed = 0;
  // Non-crossing estimate of the returned boundary on the calibration batch.
  double achieved_prob = 0.0;
  double achieved_se = 0.0;

  Boundary AsBoundary() const;
  // Integrated boundary over the family's objective range.
  double Area() const;
};

absl::StatusOr<BandCoefficients> CalibrateMinArea(double alpha, double p_l,
                                                  const EngineConfig& cfg,
                                                  double step = 0.005);

absl::StatusOr<BandCoefficients> CalibrateKFamily(double alpha, double k,
                                                  const EngineConfig& cfg,
                                                  double step = 0.005);

absl::StatusOr<BandCoefficients> CalibrateBridge(double alpha,
                                                 const EngineConfig& cfg,
                                                 double step = 0.005);

// Dispatches on `family`; `param` is p_l for min_area and k for k_family.
absl::StatusOr<BandCoefficients> Calibrate(BandFamily family, double alpha,
                                           double param,
                                           const EngineConfig& cfg,
                                           double step = 0.005);

// Non-crossing probability of the coefficients' boundary on a fresh batch.
// Pass a seed different from the calibration seed for an unbiased check.
absl::StatusOr<NoncrossingEstimate> ValidateCoefficients(
    const BandCoefficients& coeffs, const EngineConfig& cfg);

struct UniformBand {
  std::vector<double> lower;
  BandFamily family = BandFamily::kMinArea;
  double alpha = 0.05;
};

// Lower band C_n(p, alpha) aligned with `curve`:
//   min_area:  Psi(p) - (beta0/p) sqrt(V(1)) - beta1 sqrt(V(p))
//   k_family:  Psi(p) - gamma V(p)^k V(1)^(1/2-k) p^(2k-1)
//   bridge:    PsiM(p) - (delta0/p) sqrt(Vw(1))
//                      - delta1 sqrt(Vw(p) (1 - p^2 Vw(p) / Vw(1)))
// where Vw are the curve's process variances (the plain curve's variances)
// and the factor in the last square root is clamped to [0, 1]. Bridge
// coefficients need a mean-adjusted curve; the other families reject one.
absl::StatusOr<UniformBand> BandLowerBound(const GatesCurve& curve,
                                           const BandCoefficients& coeffs);

}  // namespace gatesband

#endif  // GATESBAND_BAND_CALIBRATION_H_
