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

// Experimental data: ingestion, validation and canonical score ordering.

#ifndef GATESBAND_DATASET_H_
#define GATESBAND_DATASET_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"

namespace gatesband {

// One experimental unit. `score` is the prioritization value of a fixed
// scoring rule evaluated on the unit's covariates; higher means treat first.
struct UnitRecord {
  std::string id;
  double outcome = 0.0;
  int treatment = 0;
  double score = 0.0;
  std::vector<double> covariates;

  bool operator==(const UnitRecord&) const = default;
};

// A validated completely-randomized experiment.
//
// Construct through MakeDataset() or LoadCsv(); both enforce finite outcomes
// and scores, binary treatment, a common covariate dimension and at least two
// units per arm (the plug-in variances use within-arm sample variances).
class EvaluationDataset {
 public:
  const std::vector<UnitRecord>& units() const { return units_; }
  int64_t n() const { return static_cast<int64_t>(units_.size()); }
  int64_t n1() const { return n1_; }
  int64_t n0() const { return n0_; }
  int covariate_dim() const { return covariate_dim_; }
  uint64_t tie_seed() const { return tie_seed_; }
  const std::vector<std::string>& covariate_names() const {
    return covariate_names_;
  }

  bool operator==(const EvaluationDataset&) const = default;

 private:
  friend absl::StatusOr<EvaluationDataset> MakeDataset(
      std::vector<UnitRecord>, uint64_t, std::vector<std::string>);

  std::vector<UnitRecord> units_;
  std::vector<std::string> covariate_names_;
  int64_t n1_ = 0;
  int64_t n0_ = 0;
  int covariate_dim_ = 0;
  uint64_t tie_seed_ = 0;
};

// Validates `units` and counts the arms. `covariate_names` may be empty;
// otherwise its length must match the covariate dimension.
absl::StatusOr<EvaluationDataset> MakeDataset(
    std::vector<UnitRecord> units, uint64_t tie_seed,
    std::vector<std::string> covariate_names = {});

// Header names of the columns that feed a dataset. An empty `id` means rows
// are identified by their 1-based data row number.
struct ColumnMap {
  std::string outcome = "outcome";
  std::string treatment = "treatment";
  std::string score = "score";
  std::vector<std::string> covariates;
  std::string id;
};

// Parses CSV text (header row required, '.' decimal point, RFC 4180 quoting).
// Errors name the offending line.
absl::StatusOr<EvaluationDataset> ParseCsv(std::string_view text,
                                           const ColumnMap& columns,
                                           uint64_t tie_seed);

absl::StatusOr<EvaluationDataset> LoadCsv(const std::string& path,
                                          const ColumnMap& columns,
                                          uint64_t tie_seed);

// Writes the dataset in the layout ParseCsv() reads back with `columns`.
// Numbers use the shortest round-trip representation.
std::string SerializeCsv(const EvaluationDataset& dataset,
                         const ColumnMap& columns);

// Units ordered by non-increasing score.
struct SortedDataset {
  EvaluationDataset base;
  // order[r] is the index into base.units() of the unit with rank r + 1.
  std::vector<int64_t> order;
  // Post-jitter scores along `order`; non-increasing, and strictly
  // decreasing unless the jitter falls below the scores' rounding step.
  std::vector<double> effective_scores;
  bool jitter_applied = false;

  int64_t n() const { return base.n(); }
  const UnitRecord& unit_at_rank(int64_t r) const {
    return base.units()[static_cast<size_t>(order[static_cast<size_t>(r)])];
  }
};

// Sorts by descending score. Exact ties are broken by adding seeded jitter of
// magnitude below 1e-9 * (max score - min score + 1) to every tied unit; the
// result depends only on the data and the dataset's tie seed.
SortedDataset SortByScore(const EvaluationDataset& dataset);

}  // namespace gatesband

#endif  // GATESBAND_DATASET_H_
