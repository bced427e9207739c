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

// Monte Carlo engine for one-sided boundary crossing of the standard Wiener
// process W and the standard Brownian bridge B(t) = W(t) - t W(1) on [0, 1].
//
// Paths are Gaussian random walks on the grid t_i = i/m, i = 1..m. Trial j of
// a batch is generated from its own engine seeded by (seed, j), so a path is
// the same no matter how trials are split across workers. Crossing is checked
// at grid points only, which slightly overstates the non-crossing probability
// of the continuous process; the bias shrinks like 1/sqrt(m).

#ifndef GATESBAND_PROCESS_ENGINE_H_
#define GATESBAND_PROCESS_ENGINE_H_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace gatesband {

struct EngineConfig {
  int64_t trials = 10000;
  int64_t grid_points = 10000;
  uint64_t seed = 0;
  int workers = 0;  // 0: one per hardware thread; never affects results
};

absl::Status ValidateEngineConfig(const EngineConfig& cfg);

enum class ProcessKind { kWiener, kBridge };

// Boundaries b(t) = c0 + c1 * g(t):
//   affine_sqrt(beta0, beta1):   beta0 + beta1 * sqrt(t)          (Wiener)
//   power(gamma, k):             gamma * t^k, 0 <= k < 1/2        (Wiener)
//   bridge_affine(delta0, delta1): delta0 + delta1 * sqrt(t(1-t)) (bridge)
class Boundary {
 public:
  enum class Shape { kAffineSqrt, kPower, kBridgeAffine };

  static Boundary AffineSqrt(double beta0, double beta1);
  static Boundary Power(double gamma, double k);
  static Boundary BridgeAffine(double delta0, double delta1);

  Shape shape() const { return shape_; }
  ProcessKind process() const {
    return shape_ == Shape::kBridgeAffine ? ProcessKind::kBridge
                                          : ProcessKind::kWiener;
  }
  // (beta0, beta1), (gamma, k) or (delta0, delta1).
  double first() const { return a_; }
  double second() const { return b_; }

  double operator()(double t) const;

  // Rejects negative coefficients and power exponents outside [0, 1/2).
  absl::Status Validate() const;

 private:
  Boundary(Shape shape, double a, double b) : shape_(shape), a_(a), b_(b) {}

  Shape shape_;
  double a_;
  double b_;
};

struct NoncrossingEstimate {
  double probability = 0.0;
  double standard_error = 0.0;  // binomial, sqrt(p(1-p)/trials)
  int64_t trials = 0;
};

NoncrossingEstimate MakeEstimate(int64_t successes, int64_t trials);

// A frozen batch of sample paths. Paths are regenerated on demand from the
// counter-based seeds rather than stored, so a batch costs O(workers * m)
// memory; every pass over it sees exactly the same paths.
class PathBatch {
 public:
  PathBatch(EngineConfig cfg, ProcessKind process)
      : cfg_(cfg), process_(process) {}

  const EngineConfig& config() const { return cfg_; }
  ProcessKind process() const { return process_; }
  int64_t trials() const { return cfg_.trials; }
  int64_t grid_points() const { return cfg_.grid_points; }

  // Writes X(t_1..t_m) of trial `trial` into `out` (resized to m).
  void GeneratePath(int64_t trial, std::vector<double>& out) const;

  // Calls visit(trial, path) once per trial, in parallel over trials. Each
  // worker reuses one path buffer. Allocation failure is reported as
  // RESOURCE_EXHAUSTED.
  absl::Status ForEachPath(
      const std::function<void(int64_t trial, std::span<const double> path)>&
          visit) const;

 private:
  EngineConfig cfg_;
  ProcessKind process_;
};

absl::StatusOr<PathBatch> SimulatePaths(const EngineConfig& cfg,
                                        ProcessKind process);

// P(X(t_i) <= b(t_i) for all grid points) on a fresh batch of the boundary's
// process.
absl::StatusOr<NoncrossingEstimate> NoncrossingProbability(
    const Boundary& boundary, const EngineConfig& cfg);

// Same, evaluated on an existing batch (whose process must match).
absl::StatusOr<NoncrossingEstimate> NoncrossingProbability(
    const Boundary& boundary, const PathBatch& batch);

// Per-path summary for two-coefficient boundaries c0 + c1 * g(t), c1 >= 0.
//
// A path stays below the boundary iff max_i (X_i - c1 g_i) <= c0. For c1 >= 0
// that maximum is attained on the upper convex hull of the points (g_i, X_i),
// between the leftmost point and the highest one, so only those vertices are
// kept. Feasibility checks then cost O(hull size) per path and are exactly
// monotone in both coefficients.
class AffineEnvelopeSet {
 public:
  // g = sqrt(t) on Wiener paths, g = sqrt(t(1-t)) on bridge paths.
  static absl::StatusOr<AffineEnvelopeSet> Build(const PathBatch& batch);

  int64_t trials() const { return static_cast<int64_t>(offsets_.size()) - 1; }

  // max_i (X_i - c1 g_i) for one path.
  double Excess(int64_t trial, double c1) const;

  // Number of paths with Excess(c1) <= c0.
  int64_t CountNoncrossing(double c0, double c1) const;
  double NoncrossingFraction(double c0, double c1) const {
    return static_cast<double>(CountNoncrossing(c0, c1)) /
           static_cast<double>(trials());
  }

  // Largest vertex count over all paths (diagnostics).
  int64_t max_vertices() const;

 private:
  std::vector<double> g_;
  std::vector<double> x_;
  std::vector<int64_t> offsets_;
};

// max_i X(t_i) / t_i^k for every path of a Wiener batch; a path stays below
// gamma * t^k iff its entry is <= gamma.
absl::StatusOr<std::vector<double>> PowerMaxima(const PathBatch& batch,
                                                double k);

// CSV with columns t, path_0 .. path_{count-1} for the first `count` trials.
absl::StatusOr<std::string> DumpPathsCsv(const PathBatch& batch,
                                         int64_t count = 20);

}  // namespace gatesband

#endif  // GATESBAND_PROCESS_ENGINE_H_
