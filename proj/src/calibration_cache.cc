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

#include "gatesband/calibration_cache.h"

#include <fstream>
#include <sstream>

#include "absl/strings/str_cat.h"

namespace gatesband {

nlohmann::ordered_json CoefficientsToJson(const BandCoefficients& c) {
  nlohmann::ordered_json j;
  j["family"] = BandFamilyName(c.family);
  j["alpha"] = c.alpha;
  j["p_l"] = c.p_l;
  j["k"] = c.k;
  j["step"] = c.step;
  j["trials"] = c.trials;
  j["grid_points"] = c.grid_points;
  j["seed"] = c.seed;
  j["c0"] = c.c0;
  j["c1"] = c.c1;
  j["corner"] = c.corner;
  j["achieved_prob"] = c.achieved_prob;
  j["achieved_se"] = c.achieved_se;
  return j;
}

absl::StatusOr<BandCoefficients> CoefficientsFromJson(
    const nlohmann::ordered_json& j) {
  try {
    BandCoefficients c;
    auto family = ParseBandFamily(j.at("family").get<std::string>());
    if (!family.ok()) return family.status();
    c.family = *family;
    c.alpha = j.at("alpha").get<double>();
    c.p_l = j.at("p_l").get<double>();
    c.k = j.at("k").get<double>();
    c.step = j.at("step").get<double>();
    c.trials = j.at("trials").get<int64_t>();
    c.grid_points = j.at("grid_points").get<int64_t>();
    c.seed = j.at("seed").get<uint64_t>();
    c.c0 = j.at("c0").get<double>();
    c.c1 = j.at("c1").get<double>();
    c.corner = j.at("corner").get<double>();
    c.achieved_prob = j.at("achieved_prob").get<double>();
    c.achieved_se = j.at("achieved_se").get<double>();
    return c;
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("malformed coefficient record: ", e.what()));
  }
}

bool SameCalibrationKey(const BandCoefficients& a, const BandCoefficients& b) {
  return a.family == b.family && a.alpha == b.alpha && a.k == b.k &&
         a.p_l == b.p_l && a.step == b.step && a.trials == b.trials &&
         a.grid_points == b.grid_points && a.seed == b.seed;
}

absl::StatusOr<std::optional<BandCoefficients>> CalibrationCache::Lookup(
    const BandCoefficients& key) const {
  std::ifstream in(path_);
  if (!in) return std::optional<BandCoefficients>();
  std::optional<BandCoefficients> found;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto parsed = nlohmann::ordered_json::parse(line, nullptr,
                                                /*allow_exceptions=*/false);
    if (parsed.is_discarded()) continue;
    auto record = CoefficientsFromJson(parsed);
    if (!record.ok()) continue;
    if (SameCalibrationKey(*record, key)) found = *record;
  }
  return found;
}

absl::Status CalibrationCache::Append(const BandCoefficients& coeffs) const {
  std::ofstream out(path_, std::ios::app);
  if (!out) {
    return absl::PermissionDeniedError(
        absl::StrCat("cannot open calibration cache ", path_));
  }
  out << CoefficientsToJson(coeffs).dump() << "\n";
  out.close();
  if (!out) {
    return absl::DataLossError(
        absl::StrCat("write to calibration cache ", path_, " failed"));
  }
  return absl::OkStatus();
}

absl::StatusOr<CachedCalibration> CalibrateWithCache(
    const CalibrationCache* cache, BandFamily family, double alpha,
    double param, const EngineConfig& cfg, double step) {
  if (cache != nullptr) {
    BandCoefficients key;
    key.family = family;
    key.alpha = alpha;
    key.p_l = family == BandFamily::kMinArea ? param : 0.0;
    key.k = family == BandFamily::kKFamily ? param : 0.0;
    key.step = step;
    key.trials = cfg.trials;
    key.grid_points = cfg.grid_points;
    key.seed = cfg.seed;
    auto hit = cache->Lookup(key);
    if (!hit.ok()) return hit.status();
    if (hit->has_value()) return CachedCalibration{**hit, true};
  }
  auto coeffs = Calibrate(family, alpha, param, cfg, step);
  if (!coeffs.ok()) return coeffs.status();
  if (cache != nullptr) {
    if (auto s = cache->Append(*coeffs); !s.ok()) return s;
  }
  return CachedCalibration{*coeffs, false};
}

}  // namespace gatesband
