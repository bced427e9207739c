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

// On-disk table of calibrated band coefficients.
//
// The file is append-only JSON Lines, one calibration per line with its full
// provenance. A lookup matches on (family, alpha, k, p_l, step, trials,
// grid_points, seed); the last matching record wins. Lines that fail to parse
// are skipped so a truncated final write cannot poison the table.

#ifndef GATESBAND_CALIBRATION_CACHE_H_
#define GATESBAND_CALIBRATION_CACHE_H_

#include <optional>
#include <string>

#include "absl/status/statusor.h"
#include "gatesband/band_calibration.h"
#include "json.hpp"

namespace gatesband {

nlohmann::ordered_json CoefficientsToJson(const BandCoefficients& coeffs);
absl::StatusOr<BandCoefficients> CoefficientsFromJson(
    const nlohmann::ordered_json& j);

// True if the two records describe the same calibration request.
bool SameCalibrationKey(const BandCoefficients& a, const BandCoefficients& b);

class CalibrationCache {
 public:
  explicit CalibrationCache(std::string path) : path_(std::move(path)) {}

  const std::string& path() const { return path_; }

  // Returns the cached record for the request described by `key` (only its
  // key fields are read), or nullopt. A missing file is an empty cache.
  absl::StatusOr<std::optional<BandCoefficients>> Lookup(
      const BandCoefficients& key) const;

  absl::Status Append(const BandCoefficients& coeffs) const;

 private:
  std::string path_;
};

struct CachedCalibration {
  BandCoefficients coeffs;
  bool from_cache = false;
};

// Calibrate() behind an optional cache (nullptr bypasses it).
absl::StatusOr<CachedCalibration> CalibrateWithCache(
    const CalibrationCache* cache, BandFamily family, double alpha,
    double param, const EngineConfig& cfg, double step = 0.005);

}  // namespace gatesband

#endif  // GATESBAND_CALIBRATION_CACHE_H_
