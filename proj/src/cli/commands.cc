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

#include "gatesband/cli.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "gatesband/band_calibration.h"
#include "gatesband/calibration_cache.h"
#include "gatesband/dataset.h"
#include "gatesband/estimator.h"
#include "gatesband/process_engine.h"
#include "gatesband/seeding.h"
#include "gatesband/selection.h"
#include "gatesband/simulation.h"
#include "gatesband/text_io.h"
#include "json.hpp"

namespace gatesband {

namespace {

using Json = nlohmann::ordered_json;

// Validation batches use a seed derived from, and distinct from, the
// calibration seed.
constexpr uint64_t kValidationSalt = 0x76616c6964617465ULL;
// Below this many replications the coverage fractions are reported with a
// warning.
constexpr int64_t kMinRecommendedReps = 100;

struct CommonOptions {
  uint64_t seed = 0;
  CLI::Option* seed_option = nullptr;
  int workers = 0;
  int64_t trials = 10000;
  int64_t grid = 10000;
  double alpha = 0.05;
  std::string family = "min-area";
  double k = 0.0;
  double p_l = 0.0;
  double step = 0.005;
  bool no_cache = false;
  std::string cache_file = "gatesband_calibrations.jsonl";
};

struct AnalyzeOptions {
  std::string input;
  std::string out_dir;
  std::string col_outcome = "outcome";
  std::string col_treatment = "treatment";
  std::string col_score = "score";
  std::string cols_covariates;
  std::string col_id;
  uint64_t tie_seed = 0;
  CLI::Option* tie_seed_option = nullptr;
  double threshold = 0.0;
  CLI::Option* threshold_option = nullptr;
  double p_min = 0.0;
  CLI::Option* p_min_option = nullptr;
  std::string characterize;
  bool dump_paths = false;
};

struct SimulateOptions {
  std::string dgp = "correlation";
  double r = 0.5;
  int64_t n = 100;
  int64_t reps = 500;
  std::string score = "noisy_oracle";
  double noise_sd = 1.0;
  int64_t fit_n = 1000;
  int64_t oracle_population = 2000000;
  double threshold = 0.0;
  double coverage_p_min = 0.0;
  double inflation = 1.5;
  std::string out_dir;
};

struct DemoOptions {
  std::string r_grid = "-0.9:0.9:0.3";
  int64_t n = 100;
  int64_t trials = 10000;
  std::string out_dir;
};

// Seed from the flag, or a fresh one that is announced so the run can be
// repeated.
uint64_t ResolveSeed(const CommonOptions& c, std::ostream& out) {
  if (c.seed_option != nullptr && c.seed_option->count() > 0) return c.seed;
  std::random_device device;
  const uint64_t seed =
      (static_cast<uint64_t>(device()) << 32) ^ static_cast<uint64_t>(device());
  out << "seed: " << seed << "\n";
  return seed;
}

EngineConfig MakeEngine(const CommonOptions& c, uint64_t seed) {
  EngineConfig cfg;
  cfg.trials = c.trials;
  cfg.grid_points = c.grid;
  cfg.seed = seed;
  cfg.workers = c.workers;
  return cfg;
}

absl::StatusOr<BandCoefficients> ObtainCoefficients(const CommonOptions& c,
                                                    uint64_t seed,
                                                    std::ostream& err) {
  auto family = ParseBandFamily(c.family);
  if (!family.ok()) return family.status();
  const double param = *family == BandFamily::kKFamily ? c.k : c.p_l;
  std::optional<CalibrationCache> cache;
  if (!c.no_cache) cache.emplace(c.cache_file);
  auto result = CalibrateWithCache(cache ? &*cache : nullptr, *family, c.alpha,
                                   param, MakeEngine(c, seed), c.step);
  if (!result.ok()) return result.status();
  if (result->from_cache) {
    err << "note: band coefficients read from " << c.cache_file << "\n";
  }
  return result->coeffs;
}

absl::Status EnsureDirectory(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    return absl::PermissionDeniedError(
        absl::StrCat("cannot create directory ", dir, ": ", ec.message()));
  }
  return absl::OkStatus();
}

std::string JoinPath(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

std::string Fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

absl::StatusOr<std::vector<int>> ParseIndexList(const std::string& text) {
  std::vector<int> out;
  if (text.empty()) return out;
  for (absl::string_view piece : absl::StrSplit(text, ',')) {
    const std::string s(piece);
    auto value = ParseDouble(s);
    if (!value || *value < 0 || *value != std::floor(*value)) {
      return absl::InvalidArgumentError(
          absl::StrCat("bad covariate index \"", s, "\""));
    }
    out.push_back(static_cast<int>(*value));
  }
  return out;
}

std::vector<std::string> ParseNameList(const std::string& text) {
  std::vector<std::string> out;
  if (text.empty()) return out;
  for (absl::string_view piece : absl::StrSplit(text, ',')) {
    out.emplace_back(piece);
  }
  return out;
}

absl::StatusOr<std::vector<double>> ParseRange(const std::string& text) {
  const std::vector<std::string> parts = absl::StrSplit(text, ':');
  if (parts.size() != 3) {
    return absl::InvalidArgumentError(
        absl::StrCat("range \"", text, "\" is not start:stop:step"));
  }
  const auto a = ParseDouble(parts[0]);
  const auto b = ParseDouble(parts[1]);
  const auto h = ParseDouble(parts[2]);
  if (!a || !b || !h || !(*h > 0.0) || *b < *a) {
    return absl::InvalidArgumentError(
        absl::StrCat("range \"", text, "\" needs start <= stop and step > 0"));
  }
  std::vector<double> values;
  for (int64_t i = 0;; ++i) {
    const double v = *a + static_cast<double>(i) * *h;
    if (v > *b + 1e-9 * *h) break;
    // Snap accumulated rounding so 0 prints as 0.
    values.push_back(std::round(v * 1e12) / 1e12 + 0.0);
  }
  return values;
}

Json SubgroupJson(const SubgroupReport& r, bool with_ids) {
  Json j;
  j["rule"] = SelectionRuleName(r.rule);
  if (r.rule == SelectionRule::kThreshold) j["threshold"] = r.threshold;
  j["alpha"] = r.alpha;
  j["p_selected"] = r.p_selected;
  j["estimate"] = r.estimate;
  j["guaranteed_lower"] = r.guaranteed_lower;
  j["n_selected"] = r.selected_ids.size();
  if (with_ids) j["selected_ids"] = r.selected_ids;
  return j;
}

std::string CurveCsv(const GatesCurve& curve,
                     const std::vector<double>& pointwise) {
  std::string s = "p,estimate,variance,pointwise_lower\n";
  for (size_t i = 0; i < curve.size(); ++i) {
    absl::StrAppend(&s, FormatDouble(curve.grid[i]), ",",
                    FormatDouble(curve.values[i]), ",",
                    FormatDouble(curve.variances[i]), ",",
                    FormatDouble(pointwise[i]), "\n");
  }
  return s;
}

std::string BandCsv(const GatesCurve& curve,
                    const std::vector<double>& pointwise,
                    const UniformBand& band) {
  std::string s = "p,estimate,pointwise_lower,uniform_lower\n";
  for (size_t i = 0; i < curve.size(); ++i) {
    absl::StrAppend(&s, FormatDouble(curve.grid[i]), ",",
                    FormatDouble(curve.values[i]), ",",
                    FormatDouble(pointwise[i]), ",",
                    FormatDouble(band.lower[i]), "\n");
  }
  return s;
}

std::string CharacterizationCsv(const GatesCurve& curve,
                                const CharacterizationReport& rep) {
  std::string s = "p";
  for (const auto& c : rep.covariates) {
    const std::string name = CsvEscape(c.name);
    absl::StrAppend(&s, ",", name, "_estimate,", name, "_lower,", name,
                    "_upper");
  }
  s += "\n";
  for (size_t i = 0; i < curve.size(); ++i) {
    s += FormatDouble(curve.grid[i]);
    for (const auto& c : rep.covariates) {
      absl::StrAppend(&s, ",", FormatDouble(c.curve.values[i]), ",",
                      FormatDouble(c.lower[i]), ",", FormatDouble(c.upper[i]));
    }
    s += "\n";
  }
  return s;
}

std::string CoefficientSummary(const BandCoefficients& c) {
  switch (c.family) {
    case BandFamily::kMinArea:
      return absl::StrCat("min_area (p_l = ", FormatDouble(c.p_l),
                          "): beta0 = ", Fixed(c.c0), ", beta1 = ", Fixed(c.c1));
    case BandFamily::kKFamily:
      return absl::StrCat("k_family (k = ", FormatDouble(c.k),
                          "): gamma = ", Fixed(c.c0));
    case BandFamily::kBridge:
      return absl::StrCat("bridge: delta0 = ", Fixed(c.c0),
                          ", delta1 = ", Fixed(c.c1));
  }
  return "";
}

std::string ReportText(const EvaluationDataset& data,
                       const BandCoefficients& coeffs, uint64_t seed,
                       const std::vector<SubgroupReport>& rows,
                       const std::optional<double>& threshold,
                       bool threshold_none,
                       const std::optional<CharacterizationReport>& ch,
                       size_t selected_index) {
  std::ostringstream s;
  s << "GATES analysis: n = " << data.n() << " (treated " << data.n1()
    << ", control " << data.n0() << ")\n";
  s << "Band: " << CoefficientSummary(coeffs) << "\n";
  s << "Level: " << Fixed(100.0 * (1.0 - coeffs.alpha), 1)
    << "% uniform, seed " << seed << "\n\n";
  char line[160];
  std::snprintf(line, sizeof(line), "%-18s %12s %12s %16s %8s\n", "Rule",
                "Proportion", "Estimate", "Uniform lower", "Units");
  s << line;
  for (const auto& r : rows) {
    std::string name = SelectionRuleName(r.rule);
    if (r.rule == SelectionRule::kThreshold) {
      name = absl::StrCat("threshold(", FormatDouble(r.threshold), ")");
    }
    std::snprintf(line, sizeof(line), "%-18s %12s %12s %16s %8zu\n",
                  name.c_str(), Fixed(r.p_selected).c_str(),
                  Fixed(r.estimate).c_str(),
                  Fixed(r.guaranteed_lower).c_str(), r.selected_ids.size());
    s << line;
  }
  if (threshold && threshold_none) {
    const std::string name =
        absl::StrCat("threshold(", FormatDouble(*threshold), ")");
    std::snprintf(line, sizeof(line), "%-18s %12s\n", name.c_str(), "none");
    s << line;
  }
  if (ch) {
    s << "\nCovariates of the argmax_lower subgroup (joint level "
      << Fixed(ch->joint_level, 3) << ")\n";
    std::snprintf(line, sizeof(line), "%-18s %12s %12s %12s %12s\n",
                  "Covariate", "Population", "Selected", "Lower", "Upper");
    s << line;
    for (const auto& c : ch->covariates) {
      std::snprintf(line, sizeof(line), "%-18s %12s %12s %12s %12s\n",
                    c.name.c_str(), Fixed(c.population_mean).c_str(),
                    Fixed(c.curve.values[selected_index]).c_str(),
                    Fixed(c.lower[selected_index]).c_str(),
                    Fixed(c.upper[selected_index]).c_str());
      s << line;
    }
  }
  return s.str();
}

absl::Status RunAnalyze(const AnalyzeOptions& o, const CommonOptions& c,
                        std::ostream& out, std::ostream& err) {
  const uint64_t seed = ResolveSeed(c, out);
  const uint64_t tie_seed =
      o.tie_seed_option->count() > 0 ? o.tie_seed : seed;
  ColumnMap columns;
  columns.outcome = o.col_outcome;
  columns.treatment = o.col_treatment;
  columns.score = o.col_score;
  columns.covariates = ParseNameList(o.cols_covariates);
  columns.id = o.col_id;
  auto data = LoadCsv(o.input, columns, tie_seed);
  if (!data.ok()) return data.status();
  auto characterize = ParseIndexList(o.characterize);
  if (!characterize.ok()) return characterize.status();

  auto coeffs = ObtainCoefficients(c, seed, err);
  if (!coeffs.ok()) return coeffs.status();
  const SortedDataset sorted = SortByScore(*data);
  const StatisticFamily family = coeffs->family == BandFamily::kBridge
                                     ? StatisticFamily::MeanAdjusted()
                                     : StatisticFamily::Plain();
  auto curve = ComputeGatesCurve(sorted, family);
  if (!curve.ok()) return curve.status();
  auto band = BandLowerBound(*curve, *coeffs);
  if (!band.ok()) return band.status();
  auto pointwise = PointwiseBand(*curve, c.alpha);
  if (!pointwise.ok()) return pointwise.status();

  GridConstraint constraint = DefaultConstraint(sorted.n(), coeffs->p_l);
  if (o.p_min_option->count() > 0) constraint.p_min = o.p_min;
  auto best = SelectArgmaxLower(sorted, *curve, *band, constraint);
  if (!best.ok()) return best.status();
  auto naive = SelectArgmaxPoint(sorted, *curve, *band, constraint);
  if (!naive.ok()) return naive.status();
  std::vector<SubgroupReport> rows = {*best, *naive};

  std::optional<double> threshold;
  std::optional<SubgroupReport> above;
  if (o.threshold_option->count() > 0) {
    threshold = o.threshold;
    auto t = SelectThreshold(sorted, *curve, *band, o.threshold);
    if (!t.ok()) return t.status();
    above = *t;
    if (above) rows.push_back(*above);
  }

  std::optional<CharacterizationReport> ch;
  if (!characterize->empty()) {
    auto r = Characterize(sorted, *characterize, *band, *coeffs);
    if (!r.ok()) return r.status();
    ch = std::move(*r);
  }

  if (auto s = EnsureDirectory(o.out_dir); !s.ok()) return s;

  Json curve_meta;
  curve_meta["statistic"] = curve->family.Name();
  curve_meta["n"] = curve->n;
  curve_meta["n1"] = curve->n1;
  curve_meta["n0"] = curve->n0;
  curve_meta["alpha"] = c.alpha;
  curve_meta["points"] = curve->size();
  curve_meta["columns"] = {"p", "estimate", "variance", "pointwise_lower"};

  Json report;
  report["seed"] = seed;
  report["tie_seed"] = tie_seed;
  report["input"] = o.input;
  report["n"] = data->n();
  report["n1"] = data->n1();
  report["n0"] = data->n0();
  report["statistic"] = curve->family.Name();
  report["ties_jittered"] = sorted.jitter_applied;
  report["band"] = CoefficientsToJson(*coeffs);
  report["constraint"] = {{"p_min", constraint.p_min},
                          {"p_max", constraint.p_max}};
  const Json primary = SubgroupJson(*best, true);
  for (const auto& [key, value] : primary.items()) report[key] = value;
  report["argmax_point"] = SubgroupJson(*naive, false);
  if (threshold) {
    report["threshold"] =
        above ? SubgroupJson(*above, false) : Json({{"threshold", *threshold},
                                                    {"result", "none"}});
  }
  if (ch) {
    Json table = Json::array();
    for (const auto& cov : ch->covariates) {
      table.push_back({{"index", cov.covariate},
                       {"name", cov.name},
                       {"population_mean", cov.population_mean},
                       {"selected_mean", cov.curve.values[best->index]},
                       {"lower", cov.lower[best->index]},
                       {"upper", cov.upper[best->index]}});
    }
    report["characterization"] = {
        {"alpha_per_statement", ch->alpha},
        {"joint_level", ch->joint_level},
        {"joint_level_two_sided", ch->joint_level_two_sided},
        {"covariates", table}};
  }

  std::vector<std::pair<std::string, std::string>> files = {
      {"curve.csv", CurveCsv(*curve, *pointwise)},
      {"curve.json", curve_meta.dump(2) + "\n"},
      {"band.csv", BandCsv(*curve, *pointwise, *band)},
      {"report.json", report.dump(2) + "\n"},
      {"report.txt", ReportText(*data, *coeffs, seed, rows, threshold,
                                threshold && !above, ch, best->index)},
  };
  if (ch) {
    files.emplace_back("characterization.csv", CharacterizationCsv(*curve, *ch));
  }
  if (o.dump_paths) {
    auto batch = SimulatePaths(MakeEngine(c, seed),
                               coeffs->AsBoundary().process());
    if (!batch.ok()) return batch.status();
    auto csv = DumpPathsCsv(*batch, 20);
    if (!csv.ok()) return csv.status();
    files.emplace_back("paths.csv", std::move(*csv));
  }
  for (const auto& [name, body] : files) {
    if (auto s = WriteStringToFile(JoinPath(o.out_dir, name), body); !s.ok()) {
      return s;
    }
  }
  out << std::get<1>(files[4]);
  out << "wrote " << files.size() << " files to " << o.out_dir << "\n";
  return absl::OkStatus();
}

absl::Status RunCalibrate(const CommonOptions& c, const std::string& out_file,
                          std::ostream& out, std::ostream& err) {
  const uint64_t seed = ResolveSeed(c, out);
  auto coeffs = ObtainCoefficients(c, seed, err);
  if (!coeffs.ok()) return coeffs.status();
  EngineConfig check = MakeEngine(c, SplitMix64(seed ^ kValidationSalt));
  auto validation = ValidateCoefficients(*coeffs, check);
  if (!validation.ok()) return validation.status();

  Json j = CoefficientsToJson(*coeffs);
  j["validation"] = {{"seed", check.seed},
                     {"probability", validation->probability},
                     {"standard_error", validation->standard_error}};
  if (coeffs->family != BandFamily::kKFamily) {
    out << "line search: corner = " << Fixed(coeffs->corner) << "\n";
  }
  out << CoefficientSummary(*coeffs) << "\n";
  out << "achieved_prob = " << Fixed(coeffs->achieved_prob) << " (se "
      << Fixed(coeffs->achieved_se) << ") on the calibration batch\n";
  out << "validation    = " << Fixed(validation->probability) << " (se "
      << Fixed(validation->standard_error) << ") on seed " << check.seed
      << "\n";
  out << "area = " << Fixed(coeffs->Area()) << "\n";
  out << j.dump() << "\n";
  if (!out_file.empty()) {
    return WriteStringToFile(out_file, j.dump(2) + "\n");
  }
  return absl::OkStatus();
}

absl::Status RunSimulate(const SimulateOptions& o, const CommonOptions& c,
                         std::ostream& out, std::ostream& err) {
  const uint64_t seed = ResolveSeed(c, out);
  if (o.reps < kMinRecommendedReps) {
    err << "warning: reps = " << o.reps
        << " leaves Monte Carlo error up to +/-"
        << Fixed(0.5 / std::sqrt(static_cast<double>(std::max<int64_t>(
                           o.reps, 1))))
        << " on each coverage fraction (0.5/sqrt(reps))\n";
  }
  CoverageConfig cfg;
  auto kind = ParseDgpKind(o.dgp);
  if (!kind.ok()) return kind.status();
  auto score = ParseScoreKind(o.score);
  if (!score.ok()) return score.status();
  cfg.dgp.kind = *kind;
  cfg.dgp.r = o.r;
  cfg.dgp.n = o.n;
  cfg.dgp.oracle_population = o.oracle_population;
  cfg.dgp.seed = seed;
  cfg.score.kind = *score;
  cfg.score.noise_sd = o.noise_sd;
  cfg.score.fit_n = o.fit_n;
  cfg.score.fit_seed = SplitMix64(seed);
  cfg.replications = o.reps;
  cfg.pointwise_inflation = o.inflation;
  cfg.selection_threshold = o.threshold;
  cfg.coverage_p_min = o.coverage_p_min;
  cfg.workers = c.workers;
  if (auto s = ValidateDgpSpec(cfg.dgp); !s.ok()) return s;

  auto coeffs = ObtainCoefficients(c, seed, err);
  if (!coeffs.ok()) return coeffs.status();
  auto result = CoverageStudy(cfg, *coeffs);
  if (!result.ok()) return result.status();

  const std::string inflated_name =
      absl::StrCat("pointwise_x", FormatDouble(o.inflation));
  std::vector<std::pair<std::string, double>> rows = {
      {"uniform", result->uniform},
      {"pointwise", result->pointwise},
      {inflated_name, result->pointwise_inflated},
      {"selection_argmax_lower", result->selection_argmax_lower},
      {"selection_threshold", result->selection_threshold}};
  std::string csv = "measure,value,standard_error\n";
  char line[160];
  std::snprintf(line, sizeof(line), "%-24s %10s %10s\n", "Measure", "Value",
                "SE");
  out << line;
  for (const auto& [name, value] : rows) {
    const double se = CoverageStandardError(value, result->replications);
    absl::StrAppend(&csv, name, ",", FormatDouble(value), ",",
                    FormatDouble(se), "\n");
    std::snprintf(line, sizeof(line), "%-24s %10s %10s\n", name.c_str(),
                  Fixed(value, 3).c_str(), Fixed(se, 3).c_str());
    out << line;
  }
  absl::StrAppend(&csv, "width_ratio,", FormatDouble(result->width_ratio),
                  ",\n");
  std::snprintf(line, sizeof(line), "%-24s %10s\n", "width_ratio",
                Fixed(result->width_ratio, 3).c_str());
  out << line;

  if (!o.out_dir.empty()) {
    if (auto s = EnsureDirectory(o.out_dir); !s.ok()) return s;
    Json j;
    j["seed"] = seed;
    j["dgp"] = DgpKindName(cfg.dgp.kind);
    if (cfg.dgp.kind == DgpKind::kCorrelation) j["r"] = cfg.dgp.r;
    j["n"] = cfg.dgp.n;
    j["oracle_population"] = cfg.dgp.oracle_population;
    j["score"] = ScoreKindName(cfg.score.kind);
    j["replications"] = result->replications;
    j["coverage_p_min"] = cfg.coverage_p_min;
    j["band"] = CoefficientsToJson(*coeffs);
    j["coverage"] = {{"uniform", result->uniform},
                     {"pointwise", result->pointwise},
                     {inflated_name, result->pointwise_inflated}};
    j["width_ratio"] = result->width_ratio;
    j["selection"] = {{"argmax_lower", result->selection_argmax_lower},
                      {"threshold", result->selection_threshold},
                      {"threshold_value", cfg.selection_threshold},
                      {"threshold_none", result->threshold_none}};
    j["true_ate"] = result->true_ate;
    if (auto s = WriteStringToFile(JoinPath(o.out_dir, "simulation.csv"), csv);
        !s.ok()) {
      return s;
    }
    return WriteStringToFile(JoinPath(o.out_dir, "simulation.json"),
                             j.dump(2) + "\n");
  }
  return absl::OkStatus();
}

absl::Status RunDemo(const DemoOptions& o, const CommonOptions& c,
                     std::ostream& out) {
  const uint64_t seed = ResolveSeed(c, out);
  auto grid = ParseRange(o.r_grid);
  if (!grid.ok()) return grid.status();
  CorrelationDemoConfig cfg;
  cfg.r_grid = *grid;
  cfg.n = o.n;
  cfg.trials = o.trials;
  cfg.seed = seed;
  cfg.workers = c.workers;
  auto rows = CorrelationDemo(cfg);
  if (!rows.ok()) return rows.status();

  std::string csv = "r,mean_cov,se,mean_cov_ipw,se_ipw\n";
  char line[160];
  std::snprintf(line, sizeof(line), "%6s %12s %10s %14s %10s %8s\n", "r",
                "mean_cov", "se", "mean_cov_ipw", "se_ipw", ">=-2se");
  out << line;
  for (const auto& r : *rows) {
    absl::StrAppend(&csv, FormatDouble(r.r), ",", FormatDouble(r.mean_cov),
                    ",", FormatDouble(r.se), ",", FormatDouble(r.mean_cov_ipw),
                    ",", FormatDouble(r.se_ipw), "\n");
    std::snprintf(line, sizeof(line), "%6s %12s %10s %14s %10s %8s\n",
                  Fixed(r.r, 2).c_str(), Fixed(r.mean_cov, 5).c_str(),
                  Fixed(r.se, 5).c_str(), Fixed(r.mean_cov_ipw, 5).c_str(),
                  Fixed(r.se_ipw, 5).c_str(),
                  r.mean_cov >= -2.0 * r.se ? "yes" : "no");
    out << line;
  }
  if (!o.out_dir.empty()) {
    if (auto s = EnsureDirectory(o.out_dir); !s.ok()) return s;
    Json j;
    j["seed"] = seed;
    j["n"] = cfg.n;
    j["trials"] = cfg.trials;
    Json table = Json::array();
    for (const auto& r : *rows) {
      table.push_back({{"r", r.r},
                       {"mean_cov", r.mean_cov},
                       {"se", r.se},
                       {"mean_cov_ipw", r.mean_cov_ipw},
                       {"se_ipw", r.se_ipw}});
    }
    j["rows"] = table;
    if (auto s = WriteStringToFile(JoinPath(o.out_dir, "correlation.csv"), csv);
        !s.ok()) {
      return s;
    }
    return WriteStringToFile(JoinPath(o.out_dir, "correlation.json"),
                             j.dump(2) + "\n");
  }
  return absl::OkStatus();
}

void AddSeedOptions(CLI::App* app, CommonOptions& c) {
  app->add_option("--seed", c.seed, "Master seed (generated if absent)");
  app->add_option("--workers", c.workers, "Worker threads (0 = all cores)")
      ->check(CLI::NonNegativeNumber);
}

void AddBandOptions(CLI::App* app, CommonOptions& c) {
  app->add_option("--alpha", c.alpha, "Significance level")
      ->capture_default_str();
  app->add_option("--family", c.family, "Band family: min-area, k or bridge")
      ->capture_default_str();
  app->add_option("--k", c.k, "Exponent of the k-family, 0 <= k < 1/2");
  app->add_option("--p-l", c.p_l, "Lower end of the min-area objective");
  app->add_option("--step", c.step, "Outer sweep step of the area search")
      ->capture_default_str();
  app->add_option("--trials", c.trials, "Monte Carlo paths")
      ->capture_default_str();
  app->add_option("--grid", c.grid, "Time grid points per path")
      ->capture_default_str();
  app->add_flag("--no-cache", c.no_cache, "Always recalibrate");
  app->add_option("--cache-file", c.cache_file, "Calibration cache (JSONL)")
      ->capture_default_str();
}

std::string OneLine(std::string s) {
  for (char& ch : s) {
    if (ch == '\n' || ch == '\r') ch = ' ';
  }
  return s;
}

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Uniform confidence bands for sorted group treatment effects",
               "gates"};
  app.require_subcommand(1);
  // Keys live in a section named after the subcommand, e.g. [simulate];
  // command-line flags override them.
  app.set_config("--config", "", "TOML/INI file of flag values");
  app.allow_config_extras(CLI::config_extras_mode::error);
  CommonOptions common;
  AnalyzeOptions analyze;
  SimulateOptions simulate;
  DemoOptions demo;
  std::string calibrate_out;

  CLI::App* a = app.add_subcommand("analyze", "Curve, bands and subgroups");
  a->add_option("--input", analyze.input, "Evaluation CSV")->required();
  a->add_option("--out-dir", analyze.out_dir, "Output directory")->required();
  a->add_option("--col-outcome", analyze.col_outcome)->capture_default_str();
  a->add_option("--col-treatment", analyze.col_treatment)
      ->capture_default_str();
  a->add_option("--col-score", analyze.col_score)->capture_default_str();
  a->add_option("--cols-covariates", analyze.cols_covariates,
                "Comma-separated covariate columns");
  a->add_option("--col-id", analyze.col_id, "Unit id column (default: row)");
  analyze.tie_seed_option = a->add_option(
      "--tie-seed", analyze.tie_seed, "Tie-breaking seed (default: --seed)");
  analyze.threshold_option = a->add_option(
      "--threshold", analyze.threshold, "Report the largest p with lower >= c");
  analyze.p_min_option = a->add_option(
      "--p-min", analyze.p_min, "Smallest p for argmax rules");
  a->add_option("--characterize", analyze.characterize,
                "Covariate indices (0-based, into --cols-covariates)");
  a->add_flag("--dump-paths", analyze.dump_paths,
              "Also write the first 20 calibration paths");
  AddSeedOptions(a, common);
  AddBandOptions(a, common);

  CLI::App* c = app.add_subcommand("calibrate", "Calibrate band coefficients");
  c->add_option("--out", calibrate_out, "Also write the record to this file");
  AddSeedOptions(c, common);
  AddBandOptions(c, common);

  CLI::App* s = app.add_subcommand("simulate", "Coverage study");
  s->add_option("--dgp", simulate.dgp, "correlation or acic28")
      ->capture_default_str();
  s->add_option("--r", simulate.r, "Score correlation")->capture_default_str();
  s->add_option("--n", simulate.n, "Sample size")->capture_default_str();
  s->add_option("--reps", simulate.reps, "Replications")
      ->capture_default_str();
  s->add_option("--score", simulate.score, "noisy_oracle or linear_fit")
      ->capture_default_str();
  s->add_option("--noise-sd", simulate.noise_sd, "acic28 score noise")
      ->capture_default_str();
  s->add_option("--fit-n", simulate.fit_n, "Held-out size for linear_fit")
      ->capture_default_str();
  s->add_option("--oracle-population", simulate.oracle_population)
      ->capture_default_str();
  s->add_option("--threshold", simulate.threshold, "Threshold rule c")
      ->capture_default_str();
  s->add_option("--coverage-p-min", simulate.coverage_p_min,
                "Check coverage only for p >= this")
      ->capture_default_str();
  s->add_option("--inflation", simulate.inflation,
                "Pointwise inflation factor")
      ->capture_default_str();
  s->add_option("--out-dir", simulate.out_dir, "Write simulation.csv/json");
  AddSeedOptions(s, common);
  AddBandOptions(s, common);

  CLI::App* d = app.add_subcommand("demo-correlation",
                                   "Adjacent sorted-effect covariances");
  d->add_option("--r-grid", demo.r_grid, "start:stop:step")
      ->capture_default_str();
  d->add_option("--n", demo.n)->capture_default_str();
  d->add_option("--trials", demo.trials)->capture_default_str();
  d->add_option("--out-dir", demo.out_dir, "Write correlation.csv/json");
  AddSeedOptions(d, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << "error: " << OneLine(e.what()) << "\n";
    return 2;
  }

  for (CLI::App* sub : {a, c, s, d}) {
    if (sub->parsed()) common.seed_option = sub->get_option("--seed");
  }
  absl::Status status;
  try {
    if (a->parsed()) {
      status = RunAnalyze(analyze, common, out, err);
    } else if (c->parsed()) {
      status = RunCalibrate(common, calibrate_out, out, err);
    } else if (s->parsed()) {
      status = RunSimulate(simulate, common, out, err);
    } else if (d->parsed()) {
      status = RunDemo(demo, common, out);
    }
  } catch (const std::exception& e) {
    status = absl::InternalError(e.what());
  }
  if (!status.ok()) {
    err << "error: " << OneLine(std::string(status.message())) << "\n";
    return 1;
  }
  return 0;
}

}  // namespace gatesband
