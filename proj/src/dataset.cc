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

#include "gatesband/dataset.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <unordered_map>

#include <boost/random/uniform_real_distribution.hpp>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "gatesband/text_io.h"

namespace gatesband {

namespace {

constexpr double kJitterScale = 1e-9;

int FindColumn(const std::vector<std::string>& header, const std::string& name) {
  for (size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  return -1;
}

}  // namespace

absl::StatusOr<EvaluationDataset> MakeDataset(
    std::vector<UnitRecord> units, uint64_t tie_seed,
    std::vector<std::string> covariate_names) {
  EvaluationDataset d;
  const int dim =
      units.empty() ? 0 : static_cast<int>(units.front().covariates.size());
  for (size_t i = 0; i < units.size(); ++i) {
    const UnitRecord& u = units[i];
    if (!std::isfinite(u.outcome)) {
      return absl::InvalidArgumentError(
          absl::StrCat("unit ", u.id, ": non-finite outcome"));
    }
    if (!std::isfinite(u.score)) {
      return absl::InvalidArgumentError(
          absl::StrCat("unit ", u.id, ": non-finite score"));
    }
    if (u.treatment != 0 && u.treatment != 1) {
      return absl::InvalidArgumentError(absl::StrCat(
          "unit ", u.id, ": non-binary treatment ", u.treatment));
    }
    if (static_cast<int>(u.covariates.size()) != dim) {
      return absl::InvalidArgumentError(absl::StrCat(
          "unit ", u.id, ": covariate dimension ", u.covariates.size(),
          " differs from ", dim));
    }
    for (double x : u.covariates) {
      if (!std::isfinite(x)) {
        return absl::InvalidArgumentError(
            absl::StrCat("unit ", u.id, ": non-finite covariate"));
      }
    }
    if (u.treatment == 1) {
      ++d.n1_;
    } else {
      ++d.n0_;
    }
  }
  if (d.n1_ < 2 || d.n0_ < 2) {
    return absl::FailedPreconditionError(
        absl::StrCat("need at least 2 units per arm, got n1=", d.n1_,
                     " n0=", d.n0_));
  }
  if (!covariate_names.empty() &&
      static_cast<int>(covariate_names.size()) != dim) {
    return absl::InvalidArgumentError("covariate name count mismatch");
  }
  d.units_ = std::move(units);
  d.covariate_names_ = std::move(covariate_names);
  d.covariate_dim_ = dim;
  d.tie_seed_ = tie_seed;
  return d;
}

absl::StatusOr<EvaluationDataset> ParseCsv(std::string_view text,
                                           const ColumnMap& columns,
                                           uint64_t tie_seed) {
  auto records = ParseCsvRecords(text);
  if (!records.ok()) return records.status();
  if (records->empty()) return absl::InvalidArgumentError("empty CSV: no header");

  const std::vector<std::string>& header = records->front().fields;
  auto require = [&](const std::string& name) -> absl::StatusOr<int> {
    const int idx = FindColumn(header, name);
    if (idx < 0) {
      return absl::NotFoundError(absl::StrCat("missing column \"", name, "\""));
    }
    return idx;
  };
  auto outcome_col = require(columns.outcome);
  if (!outcome_col.ok()) return outcome_col.status();
  auto treatment_col = require(columns.treatment);
  if (!treatment_col.ok()) return treatment_col.status();
  auto score_col = require(columns.score);
  if (!score_col.ok()) return score_col.status();
  int id_col = -1;
  if (!columns.id.empty()) {
    auto c = require(columns.id);
    if (!c.ok()) return c.status();
    id_col = *c;
  }
  std::vector<int> cov_cols;
  for (const std::string& name : columns.covariates) {
    auto c = require(name);
    if (!c.ok()) return c.status();
    cov_cols.push_back(*c);
  }

  std::vector<UnitRecord> units;
  units.reserve(records->size() - 1);
  for (size_t r = 1; r < records->size(); ++r) {
    const CsvRecord& rec = (*records)[r];
    auto field = [&](int col, const std::string& name)
        -> absl::StatusOr<double> {
      if (col >= static_cast<int>(rec.fields.size()) ||
          rec.fields[static_cast<size_t>(col)].empty()) {
        return absl::InvalidArgumentError(absl::StrCat(
            "line ", rec.line, ": missing value in column \"", name, "\""));
      }
      auto v = ParseDouble(rec.fields[static_cast<size_t>(col)]);
      if (!v.has_value()) {
        return absl::InvalidArgumentError(
            absl::StrCat("line ", rec.line, ": cannot parse \"",
                         rec.fields[static_cast<size_t>(col)],
                         "\" in column \"", name, "\""));
      }
      if (!std::isfinite(*v)) {
        return absl::InvalidArgumentError(absl::StrCat(
            "line ", rec.line, ": non-finite value in column \"", name, "\""));
      }
      return *v;
    };

    UnitRecord unit;
    if (id_col >= 0 && id_col < static_cast<int>(rec.fields.size())) {
      unit.id = rec.fields[static_cast<size_t>(id_col)];
    } else {
      unit.id = std::to_string(r);
    }
    auto y = field(*outcome_col, columns.outcome);
    if (!y.ok()) return y.status();
    auto t = field(*treatment_col, columns.treatment);
    if (!t.ok()) return t.status();
    auto s = field(*score_col, columns.score);
    if (!s.ok()) return s.status();
    if (*t != 0.0 && *t != 1.0) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", rec.line, ": non-binary treatment \"",
                       rec.fields[static_cast<size_t>(*treatment_col)], "\""));
    }
    unit.outcome = *y;
    unit.treatment = *t == 1.0 ? 1 : 0;
    unit.score = *s;
    for (size_t j = 0; j < cov_cols.size(); ++j) {
      auto x = field(cov_cols[j], columns.covariates[j]);
      if (!x.ok()) return x.status();
      unit.covariates.push_back(*x);
    }
    units.push_back(std::move(unit));
  }
  return MakeDataset(std::move(units), tie_seed, columns.covariates);
}

absl::StatusOr<EvaluationDataset> LoadCsv(const std::string& path,
                                          const ColumnMap& columns,
                                          uint64_t tie_seed) {
  auto text = ReadFileToString(path);
  if (!text.ok()) return text.status();
  auto d = ParseCsv(*text, columns, tie_seed);
  if (!d.ok()) {
    return absl::Status(d.status().code(),
                        absl::StrCat(path, ": ", d.status().message()));
  }
  return d;
}

std::string SerializeCsv(const EvaluationDataset& dataset,
                         const ColumnMap& columns) {
  std::vector<std::string> header;
  const bool with_id = !columns.id.empty();
  if (with_id) header.push_back(CsvEscape(columns.id));
  header.push_back(CsvEscape(columns.outcome));
  header.push_back(CsvEscape(columns.treatment));
  header.push_back(CsvEscape(columns.score));
  for (const auto& c : columns.covariates) header.push_back(CsvEscape(c));

  std::string out = absl::StrJoin(header, ",");
  out += "\n";
  for (const UnitRecord& u : dataset.units()) {
    std::vector<std::string> row;
    if (with_id) row.push_back(CsvEscape(u.id));
    row.push_back(FormatDouble(u.outcome));
    row.push_back(std::to_string(u.treatment));
    row.push_back(FormatDouble(u.score));
    for (double x : u.covariates) row.push_back(FormatDouble(x));
    out += absl::StrJoin(row, ",");
    out += "\n";
  }
  return out;
}

SortedDataset SortByScore(const EvaluationDataset& dataset) {
  const auto& units = dataset.units();
  const size_t n = units.size();
  SortedDataset sorted;
  sorted.base = dataset;

  std::vector<double> effective(n);
  double lo = units.empty() ? 0.0 : units[0].score;
  double hi = lo;
  std::unordered_map<double, int> multiplicity;
  for (size_t i = 0; i < n; ++i) {
    effective[i] = units[i].score;
    lo = std::min(lo, units[i].score);
    hi = std::max(hi, units[i].score);
    ++multiplicity[units[i].score];
  }

  const double magnitude = kJitterScale * (hi - lo + 1.0);
  std::mt19937_64 rng(dataset.tie_seed());
  boost::random::uniform_real_distribution<double> unit_interval(0.0, 1.0);
  // The draw also orders units whose jitter is absorbed by rounding (scores
  // far larger than the range).
  std::vector<double> draw(n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    if (multiplicity[units[i].score] > 1) {
      draw[i] = unit_interval(rng);
      effective[i] += magnitude * draw[i];
      sorted.jitter_applied = true;
    }
  }

  sorted.order.resize(n);
  std::iota(sorted.order.begin(), sorted.order.end(), int64_t{0});
  std::stable_sort(sorted.order.begin(), sorted.order.end(),
                   [&](int64_t a, int64_t b) {
                     const size_t ia = static_cast<size_t>(a);
                     const size_t ib = static_cast<size_t>(b);
                     if (effective[ia] != effective[ib]) {
                       return effective[ia] > effective[ib];
                     }
                     return draw[ia] > draw[ib];
                   });
  sorted.effective_scores.resize(n);
  for (size_t r = 0; r < n; ++r) {
    sorted.effective_scores[r] = effective[static_cast<size_t>(sorted.order[r])];
  }
  return sorted;
}

}  // namespace gatesband
