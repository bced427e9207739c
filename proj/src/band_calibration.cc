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

#include "gatesband/band_calibration.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include "absl/strings/str_cat.h"

namespace gatesband {

namespace {

// Line searches give up beyond this boundary level.
constexpr double kCoefficientCap = 64.0;
constexpr double kCornerTolerance = 1e-6;

absl::Status CheckCommon(double alpha, double step, const EngineConfig& cfg) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("alpha must lie in (0, 1), got ", alpha));
  }
  if (!(step > 0.0) || !std::isfinite(step)) {
    return absl::InvalidArgumentError(
        absl::StrCat("step must be positive, got ", step));
  }
  if (auto s = ValidateEngineConfig(cfg); !s.ok()) return s;
  if (alpha * static_cast<double>(cfg.trials) < 1.0) {
    return absl::OutOfRangeError(absl::StrCat(
        "alpha=", alpha, " is below the Monte Carlo resolution 1/trials=",
        1.0 / static_cast<double>(cfg.trials), "; increase trials"));
  }
  return absl::OkStatus();
}

// Smallest number of non-crossing paths that meets the 1 - alpha target.
int64_t RequiredCount(double alpha, int64_t trials) {
  return static_cast<int64_t>(
      std::ceil((1.0 - alpha) * static_cast<double>(trials) - 1e-9));
}

// Smallest c with feasible(c), by doubling then bisection.
absl::StatusOr<double> LineSearch(const std::function<bool(double)>& feasible,
                                  double tolerance, const char* what) {
  double lo = 0.0;
  double hi = 1.0;
  while (!feasible(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > kCoefficientCap) {
      return absl::OutOfRangeError(absl::StrCat(
          what, " search exceeded the cap ", kCoefficientCap,
          "; alpha is too small for this configuration"));
    }
  }
  if (feasible(0.0)) return 0.0;
  while (hi - lo > tolerance) {
    const double mid = 0.5 * (lo + hi);
    if (feasible(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

// Outer sweep over c0 in [0, corner] with inner bisection on c1 in
// [0, 3/4 corner], keeping the feasible candidate of least area. The upper
// end of the c1 bracket carries over between sweeps: a larger c0 only
// enlarges the feasible set.
struct SweepResult {
  double c0 = 0.0;
  double c1 = 0.0;
  double area = std::numeric_limits<double>::infinity();
};

SweepResult AreaSweep(const AffineEnvelopeSet& env, int64_t required,
                      double corner, double step,
                      const std::function<double(double, double)>& area) {
  auto feasible = [&](double c0, double c1) {
    return env.CountNoncrossing(c0, c1) >= required;
  };
  SweepResult best;
  double c1_hi = 0.75 * corner;
  bool hi_feasible = false;
  const int64_t sweeps = static_cast<int64_t>(std::floor(corner / step));
  for (int64_t s = 0; s <= sweeps; ++s) {
    const double c0 = static_cast<double>(s) * step;
    double c1_lo = 0.0;
    while (c1_hi - c1_lo > step) {
      const double mid = 0.5 * (c1_lo + c1_hi);
      if (feasible(c0, mid)) {
        c1_hi = mid;
        hi_feasible = true;
      } else {
        c1_lo = mid;
      }
    }
    if (!hi_feasible) {
      hi_feasible = feasible(c0, c1_hi);
      if (!hi_feasible) continue;
    }
    const double a = area(c0, c1_hi);
    if (a < best.area) best = {c0, c1_hi, a};
  }
  // The constant boundary at the corner is always feasible.
  const double corner_area = area(corner, 0.0);
  if (corner_area <= best.area) best = {corner, 0.0, corner_area};
  return best;
}

absl::StatusOr<BandCoefficients> CalibrateAffine(BandFamily family,
                                                 double alpha, double p_l,
                                                 const EngineConfig& cfg,
                                                 double step) {
  const ProcessKind process = family == BandFamily::kBridge
                                  ? ProcessKind::kBridge
                                  : ProcessKind::kWiener;
  auto batch = SimulatePaths(cfg, process);
  if (!batch.ok()) return batch.status();
  auto env = AffineEnvelopeSet::Build(*batch);
  if (!env.ok()) return env.status();
  const int64_t required = RequiredCount(alpha, cfg.trials);

  auto corner = LineSearch(
      [&](double c0) { return env->CountNoncrossing(c0, 0.0) >= required; },
      kCornerTolerance,
      family == BandFamily::kBridge ? "delta0-bar" : "beta0-bar");
  if (!corner.ok()) return corner.status();

  BandCoefficients out;
  out.family = family;
  out.alpha = alpha;
  out.p_l = family == BandFamily::kMinArea ? p_l : 0.0;
  out.corner = *corner;
  out.step = step;
  out.trials = cfg.trials;
  out.grid_points = cfg.grid_points;
  out.seed = cfg.seed;

  const SweepResult best = AreaSweep(
      *env, required, *corner, step, [&](double c0, double c1) {
        out.c0 = c0;
        out.c1 = c1;
        return out.Area();
      });
  out.c0 = best.c0;
  out.c1 = best.c1;
  const NoncrossingEstimate e =
      MakeEstimate(env->CountNoncrossing(out.c0, out.c1), cfg.trials);
  out.achieved_prob = e.probability;
  out.achieved_se = e.standard_error;
  return out;
}

}  // namespace

std::string BandFamilyName(BandFamily family) {
  switch (family) {
    case BandFamily::kMinArea:
      return "min_area";
    case BandFamily::kKFamily:
      return "k_family";
    case BandFamily::kBridge:
      return "bridge";
  }
  return "unknown";
}

absl::StatusOr<BandFamily> ParseBandFamily(const std::string& name) {
  if (name == "min_area" || name == "min-area") return BandFamily::kMinArea;
  if (name == "k_family" || name == "k") return BandFamily::kKFamily;
  if (name == "bridge") return BandFamily::kBridge;
  return absl::InvalidArgumentError(
      absl::StrCat("unknown band family \"", name,
                   "\" (expected min-area, k or bridge)"));
}

Boundary BandCoefficients::AsBoundary() const {
  switch (family) {
    case BandFamily::kMinArea:
      return Boundary::AffineSqrt(c0, c1);
    case BandFamily::kKFamily:
      return Boundary::Power(c0, k);
    case BandFamily::kBridge:
      return Boundary::BridgeAffine(c0, c1);
  }
  return Boundary::AffineSqrt(c0, c1);
}

double BandCoefficients::Area() const {
  switch (family) {
    case BandFamily::kMinArea:
      return (1.0 - p_l) * c0 +
             (2.0 / 3.0) * (1.0 - std::pow(p_l, 1.5)) * c1;
    case BandFamily::kKFamily:
      return c0 / (k + 1.0);
    case BandFamily::kBridge:
      return c0 + std::numbers::pi / 8.0 * c1;
  }
  return 0.0;
}

absl::StatusOr<BandCoefficients> CalibrateMinArea(double alpha, double p_l,
                                                  const EngineConfig& cfg,
                                                  double step) {
  if (auto s = CheckCommon(alpha, step, cfg); !s.ok()) return s;
  if (!(p_l >= 0.0 && p_l < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("p_l must lie in [0, 1), got ", p_l));
  }
  return CalibrateAffine(BandFamily::kMinArea, alpha, p_l, cfg, step);
}

absl::StatusOr<BandCoefficients> CalibrateBridge(double alpha,
                                                 const EngineConfig& cfg,
                                                 double step) {
  if (auto s = CheckCommon(alpha, step, cfg); !s.ok()) return s;
  return CalibrateAffine(BandFamily::kBridge, alpha, 0.0, cfg, step);
}

absl::StatusOr<BandCoefficients> CalibrateKFamily(double alpha, double k,
                                                  const EngineConfig& cfg,
                                                  double step) {
  if (auto s = Boundary::Power(1.0, k).Validate(); !s.ok()) return s;
  if (auto s = CheckCommon(alpha, step, cfg); !s.ok()) return s;
  auto batch = SimulatePaths(cfg, ProcessKind::kWiener);
  if (!batch.ok()) return batch.status();
  auto maxima = PowerMaxima(*batch, k);
  if (!maxima.ok()) return maxima.status();
  const int64_t required = RequiredCount(alpha, cfg.trials);
  auto count_below = [&](double gamma) {
    return static_cast<int64_t>(std::count_if(
        maxima->begin(), maxima->end(), [&](double m) { return m <= gamma; }));
  };
  auto gamma = LineSearch(
      [&](double g) { return count_below(g) >= required; }, step, "gamma");
  if (!gamma.ok()) return gamma.status();

  BandCoefficients out;
  out.family = BandFamily::kKFamily;
  out.alpha = alpha;
  out.k = k;
  out.c0 = *gamma;
  out.step = step;
  out.trials = cfg.trials;
  out.grid_points = cfg.grid_points;
  out.seed = cfg.seed;
  const NoncrossingEstimate e = MakeEstimate(count_below(out.c0), cfg.trials);
  out.achieved_prob = e.probability;
  out.achieved_se = e.standard_error;
  return out;
}

absl::StatusOr<BandCoefficients> Calibrate(BandFamily family, double alpha,
                                           double param,
                                           const EngineConfig& cfg,
                                           double step) {
  switch (family) {
    case BandFamily::kMinArea:
      return CalibrateMinArea(alpha, param, cfg, step);
    case BandFamily::kKFamily:
      return CalibrateKFamily(alpha, param, cfg, step);
    case BandFamily::kBridge:
      return CalibrateBridge(alpha, cfg, step);
  }
  return absl::InvalidArgumentError("unknown band family");
}

absl::StatusOr<NoncrossingEstimate> ValidateCoefficients(
    const BandCoefficients& coeffs, const EngineConfig& cfg) {
  return NoncrossingProbability(coeffs.AsBoundary(), cfg);
}

absl::StatusOr<UniformBand> BandLowerBound(const GatesCurve& curve,
                                           const BandCoefficients& coeffs) {
  const bool mean_adjusted =
      curve.family.kind == StatisticKind::kMeanAdjusted;
  if ((coeffs.family == BandFamily::kBridge) != mean_adjusted) {
    return absl::InvalidArgumentError(absl::StrCat(
        "band family ", BandFamilyName(coeffs.family),
        " does not match curve family ", curve.family.Name(),
        " (bridge bands go with mean-adjusted curves only)"));
  }
  if (curve.size() == 0) return absl::InvalidArgumentError("empty curve");

  UniformBand band;
  band.family = coeffs.family;
  band.alpha = coeffs.alpha;
  band.lower.resize(curve.size());
  const double v_end = curve.variances.back();
  const double v_ref = curve.process_variances.back();
  for (size_t i = 0; i < curve.size(); ++i) {
    const double p = curve.grid[i];
    const double v = curve.variances[i];
    double width = 0.0;
    switch (coeffs.family) {
      case BandFamily::kMinArea:
        width = coeffs.c0 / p * std::sqrt(v_end) + coeffs.c1 * std::sqrt(v);
        break;
      case BandFamily::kKFamily:
        width = coeffs.c0 * std::pow(v, coeffs.k) *
                std::pow(v_end, 0.5 - coeffs.k) *
                std::pow(p, 2.0 * coeffs.k - 1.0);
        break;
      case BandFamily::kBridge: {
        const double vw = curve.process_variances[i];
        const double shrink =
            v_ref > 0.0 ? std::clamp(1.0 - p * p * vw / v_ref, 0.0, 1.0) : 0.0;
        width = coeffs.c0 / p * std::sqrt(v_ref) +
                coeffs.c1 * std::sqrt(vw * shrink);
        break;
      }
    }
    band.lower[i] = curve.values[i] - width;
  }
  return band;
}

}  // namespace gatesband
