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

#include "gatesband/process_engine.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <new>
#include <random>

#include <boost/random/normal_distribution.hpp>

#include "absl/strings/str_cat.h"
#include "gatesband/parallel.h"
#include "gatesband/seeding.h"
#include "gatesband/text_io.h"

namespace gatesband {

namespace {

constexpr int64_t kMinTrials = 100;
constexpr int64_t kMinGridPoints = 100;
// Above this many trials, envelope counting is split across workers.
constexpr int64_t kParallelCountThreshold = 50000;

struct Point {
  double g;
  double x;
};

// Upper hull of points sorted by ascending g (ties: ascending x), truncated at
// the highest vertex. Those are the only candidates for max(x - c1 g), c1>=0.
void UpperHullPrefix(std::span<const Point> pts, std::vector<Point>& hull) {
  hull.clear();
  for (const Point& p : pts) {
    while (hull.size() >= 2) {
      const Point& a = hull[hull.size() - 2];
      const Point& b = hull[hull.size() - 1];
      const double cross = (b.g - a.g) * (p.x - a.x) - (b.x - a.x) * (p.g - a.g);
      if (cross >= 0.0) {
        hull.pop_back();
      } else {
        break;
      }
    }
    hull.push_back(p);
  }
  size_t top = 0;
  for (size_t i = 1; i < hull.size(); ++i) {
    if (hull[i].x > hull[top].x) top = i;
  }
  hull.resize(top + 1);
}

std::vector<double> GridTimes(int64_t m) {
  std::vector<double> t(static_cast<size_t>(m));
  for (int64_t i = 0; i < m; ++i) {
    t[static_cast<size_t>(i)] =
        static_cast<double>(i + 1) / static_cast<double>(m);
  }
  return t;
}

}  // namespace

absl::Status ValidateEngineConfig(const EngineConfig& cfg) {
  if (cfg.trials < kMinTrials) {
    return absl::InvalidArgumentError(
        absl::StrCat("trials must be >= ", kMinTrials, ", got ", cfg.trials));
  }
  if (cfg.grid_points < kMinGridPoints) {
    return absl::InvalidArgumentError(absl::StrCat(
        "grid points must be >= ", kMinGridPoints, ", got ", cfg.grid_points));
  }
  if (cfg.workers < 0) {
    return absl::InvalidArgumentError("workers must be >= 0");
  }
  return absl::OkStatus();
}

Boundary Boundary::AffineSqrt(double beta0, double beta1) {
  return Boundary(Shape::kAffineSqrt, beta0, beta1);
}

Boundary Boundary::Power(double gamma, double k) {
  return Boundary(Shape::kPower, gamma, k);
}

Boundary Boundary::BridgeAffine(double delta0, double delta1) {
  return Boundary(Shape::kBridgeAffine, delta0, delta1);
}

double Boundary::operator()(double t) const {
  switch (shape_) {
    case Shape::kAffineSqrt:
      return a_ + b_ * std::sqrt(t);
    case Shape::kPower:
      return a_ * std::pow(t, b_);
    case Shape::kBridgeAffine:
      return a_ + b_ * std::sqrt(t * (1.0 - t));
  }
  return 0.0;
}

absl::Status Boundary::Validate() const {
  if (!std::isfinite(a_) || !std::isfinite(b_)) {
    return absl::InvalidArgumentError("boundary coefficients must be finite");
  }
  if (shape_ == Shape::kPower) {
    if (b_ < 0.0 || b_ >= 0.5) {
      return absl::InvalidArgumentError(absl::StrCat(
          "power boundary needs 0 <= k < 1/2, got k=", b_,
          ": by the law of the iterated logarithm W(t) exceeds gamma*t^k "
          "arbitrarily close to t=0 almost surely for every gamma when "
          "k >= 1/2, so no finite gamma exists"));
    }
    if (a_ < 0.0) return absl::InvalidArgumentError("gamma must be >= 0");
    return absl::OkStatus();
  }
  if (a_ < 0.0 || b_ < 0.0) {
    return absl::InvalidArgumentError("boundary coefficients must be >= 0");
  }
  return absl::OkStatus();
}

NoncrossingEstimate MakeEstimate(int64_t successes, int64_t trials) {
  NoncrossingEstimate e;
  e.trials = trials;
  if (trials <= 0) return e;
  e.probability = static_cast<double>(successes) / static_cast<double>(trials);
  e.standard_error = std::sqrt(e.probability * (1.0 - e.probability) /
                               static_cast<double>(trials));
  return e;
}

void PathBatch::GeneratePath(int64_t trial, std::vector<double>& out) const {
  const int64_t m = cfg_.grid_points;
  out.resize(static_cast<size_t>(m));
  std::mt19937_64 engine(StreamSeed(cfg_.seed, trial));
  boost::random::normal_distribution<double> normal;
  const double step_sd = std::sqrt(1.0 / static_cast<double>(m));
  double w = 0.0;
  for (int64_t i = 0; i < m; ++i) {
    w += step_sd * normal(engine);
    out[static_cast<size_t>(i)] = w;
  }
  if (process_ == ProcessKind::kBridge) {
    const double end = out.back();
    for (int64_t i = 0; i < m - 1; ++i) {
      const double t = static_cast<double>(i + 1) / static_cast<double>(m);
      out[static_cast<size_t>(i)] -= t * end;
    }
    out.back() = 0.0;
  }
}

absl::Status PathBatch::ForEachPath(
    const std::function<void(int64_t, std::span<const double>)>& visit) const {
  try {
    ParallelFor(cfg_.trials, cfg_.workers, [&](int64_t begin, int64_t end) {
      std::vector<double> path;
      path.reserve(static_cast<size_t>(cfg_.grid_points));
      for (int64_t trial = begin; trial < end; ++trial) {
        GeneratePath(trial, path);
        visit(trial, path);
      }
    });
  } catch (const std::bad_alloc&) {
    return absl::ResourceExhaustedError(absl::StrCat(
        "out of memory simulating ", cfg_.trials, " paths of ",
        cfg_.grid_points, " points"));
  }
  return absl::OkStatus();
}

absl::StatusOr<PathBatch> SimulatePaths(const EngineConfig& cfg,
                                        ProcessKind process) {
  if (auto s = ValidateEngineConfig(cfg); !s.ok()) return s;
  return PathBatch(cfg, process);
}

absl::StatusOr<NoncrossingEstimate> NoncrossingProbability(
    const Boundary& boundary, const PathBatch& batch) {
  if (auto s = boundary.Validate(); !s.ok()) return s;
  if (boundary.process() != batch.process()) {
    return absl::InvalidArgumentError(
        "boundary and path batch use different processes");
  }
  const std::vector<double> t = GridTimes(batch.grid_points());
  std::vector<double> level(t.size());
  for (size_t i = 0; i < t.size(); ++i) level[i] = boundary(t[i]);

  std::vector<uint8_t> below;
  try {
    below.assign(static_cast<size_t>(batch.trials()), 0);
  } catch (const std::bad_alloc&) {
    return absl::ResourceExhaustedError("cannot allocate per-trial results");
  }
  auto status = batch.ForEachPath([&](int64_t trial, std::span<const double> x) {
    bool ok = true;
    for (size_t i = 0; i < x.size(); ++i) {
      if (x[i] > level[i]) {
        ok = false;
        break;
      }
    }
    below[static_cast<size_t>(trial)] = ok ? 1 : 0;
  });
  if (!status.ok()) return status;
  int64_t successes = 0;
  for (uint8_t b : below) successes += b;
  return MakeEstimate(successes, batch.trials());
}

absl::StatusOr<NoncrossingEstimate> NoncrossingProbability(
    const Boundary& boundary, const EngineConfig& cfg) {
  if (auto s = boundary.Validate(); !s.ok()) return s;
  auto batch = SimulatePaths(cfg, boundary.process());
  if (!batch.ok()) return batch.status();
  return NoncrossingProbability(boundary, *batch);
}

absl::StatusOr<AffineEnvelopeSet> AffineEnvelopeSet::Build(
    const PathBatch& batch) {
  const int64_t m = batch.grid_points();
  const std::vector<double> t = GridTimes(m);
  std::vector<double> g(t.size());
  const bool bridge = batch.process() == ProcessKind::kBridge;
  for (size_t i = 0; i < t.size(); ++i) {
    g[i] = bridge ? std::sqrt(t[i] * (1.0 - t[i])) : std::sqrt(t[i]);
  }
  // On the bridge, g rises on t <= 1/2 and falls after: two sorted runs.
  size_t rising = t.size();
  if (bridge) {
    rising = 0;
    while (rising < t.size() && t[rising] <= 0.5) ++rising;
  }

  std::vector<std::vector<Point>> per_trial;
  try {
    per_trial.resize(static_cast<size_t>(batch.trials()));
  } catch (const std::bad_alloc&) {
    return absl::ResourceExhaustedError("cannot allocate envelope storage");
  }
  auto status = batch.ForEachPath([&](int64_t trial, std::span<const double> x) {
    thread_local std::vector<Point> pts, left, right, merged;
    std::vector<Point>& hull = per_trial[static_cast<size_t>(trial)];
    pts.resize(x.size());
    for (size_t i = 0; i < x.size(); ++i) pts[i] = {g[i], x[i]};
    if (!bridge) {
      UpperHullPrefix(pts, hull);
      hull.shrink_to_fit();
      return;
    }
    // Falling half reversed into ascending g, then merge the two hulls.
    UpperHullPrefix(std::span<const Point>(pts.data(), rising), left);
    std::reverse(pts.begin() + static_cast<std::ptrdiff_t>(rising), pts.end());
    UpperHullPrefix(std::span<const Point>(pts.data() + rising,
                                           pts.size() - rising),
                    right);
    merged.clear();
    std::merge(left.begin(), left.end(), right.begin(), right.end(),
               std::back_inserter(merged), [](const Point& a, const Point& b) {
                 return a.g < b.g || (a.g == b.g && a.x < b.x);
               });
    UpperHullPrefix(merged, hull);
    hull.shrink_to_fit();
  });
  if (!status.ok()) return status;

  AffineEnvelopeSet set;
  set.offsets_.reserve(per_trial.size() + 1);
  set.offsets_.push_back(0);
  for (const auto& hull : per_trial) {
    for (const Point& p : hull) {
      set.g_.push_back(p.g);
      set.x_.push_back(p.x);
    }
    set.offsets_.push_back(static_cast<int64_t>(set.g_.size()));
  }
  return set;
}

double AffineEnvelopeSet::Excess(int64_t trial, double c1) const {
  double best = -std::numeric_limits<double>::infinity();
  const auto lo = static_cast<size_t>(offsets_[static_cast<size_t>(trial)]);
  const auto hi = static_cast<size_t>(offsets_[static_cast<size_t>(trial) + 1]);
  for (size_t v = lo; v < hi; ++v) best = std::max(best, x_[v] - c1 * g_[v]);
  return best;
}

int64_t AffineEnvelopeSet::CountNoncrossing(double c0, double c1) const {
  auto count_range = [&](int64_t begin, int64_t end) {
    int64_t count = 0;
    for (int64_t j = begin; j < end; ++j) {
      const auto lo = static_cast<size_t>(offsets_[static_cast<size_t>(j)]);
      const auto hi = static_cast<size_t>(offsets_[static_cast<size_t>(j) + 1]);
      bool ok = true;
      for (size_t v = lo; v < hi; ++v) {
        if (x_[v] - c1 * g_[v] > c0) {
          ok = false;
          break;
        }
      }
      count += ok ? 1 : 0;
    }
    return count;
  };
  const int64_t n = trials();
  if (n < kParallelCountThreshold) return count_range(0, n);
  const int workers = ResolveWorkers(0);
  std::vector<int64_t> partial(static_cast<size_t>(workers), 0);
  const int64_t chunk = (n + workers - 1) / workers;
  ParallelFor(workers, workers, [&](int64_t wb, int64_t we) {
    for (int64_t w = wb; w < we; ++w) {
      partial[static_cast<size_t>(w)] =
          count_range(std::min(n, w * chunk), std::min(n, (w + 1) * chunk));
    }
  });
  int64_t total = 0;
  for (int64_t c : partial) total += c;
  return total;
}

int64_t AffineEnvelopeSet::max_vertices() const {
  int64_t best = 0;
  for (size_t j = 0; j + 1 < offsets_.size(); ++j) {
    best = std::max(best, offsets_[j + 1] - offsets_[j]);
  }
  return best;
}

absl::StatusOr<std::vector<double>> PowerMaxima(const PathBatch& batch,
                                                double k) {
  if (batch.process() != ProcessKind::kWiener) {
    return absl::InvalidArgumentError("power boundaries apply to Wiener paths");
  }
  if (auto s = Boundary::Power(0.0, k).Validate(); !s.ok()) return s;
  const std::vector<double> t = GridTimes(batch.grid_points());
  std::vector<double> scale(t.size());
  for (size_t i = 0; i < t.size(); ++i) scale[i] = std::pow(t[i], -k);
  std::vector<double> maxima(static_cast<size_t>(batch.trials()));
  auto status = batch.ForEachPath([&](int64_t trial, std::span<const double> x) {
    double best = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < x.size(); ++i) best = std::max(best, x[i] * scale[i]);
    maxima[static_cast<size_t>(trial)] = best;
  });
  if (!status.ok()) return status;
  return maxima;
}

absl::StatusOr<std::string> DumpPathsCsv(const PathBatch& batch,
                                         int64_t count) {
  count = std::min(count, batch.trials());
  const int64_t m = batch.grid_points();
  std::vector<std::vector<double>> paths(static_cast<size_t>(count));
  for (int64_t j = 0; j < count; ++j) {
    batch.GeneratePath(j, paths[static_cast<size_t>(j)]);
  }
  std::string out = "t";
  for (int64_t j = 0; j < count; ++j) absl::StrAppend(&out, ",path_", j);
  out += "\n";
  for (int64_t i = 0; i < m; ++i) {
    out += FormatDouble(static_cast<double>(i + 1) / static_cast<double>(m));
    for (int64_t j = 0; j < count; ++j) {
      out += ",";
      out += FormatDouble(paths[static_cast<size_t>(j)][static_cast<size_t>(i)]);
    }
    out += "\n";
  }
  return out;
}

}  // namespace gatesband
