/*
 * Copyright 2026 The vbmtl Authors.
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

#ifndef VBMTL_HARNESS_HPP_
#define VBMTL_HARNESS_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vbmtl/data.hpp"
#include "vbmtl/error.hpp"
#include "vbmtl/json_io.hpp"
#include "vbmtl/metrics.hpp"
#include "vbmtl/synth.hpp"
#include "vbmtl/train.hpp"

namespace vbmtl {

// Where one named feature set comes from: either files on disk or a
// synthetic generator.
struct FeatureSetSource {
  std::optional<SynthSpec> synthetic;
  std::filesystem::path train;
  std::filesystem::path val;
  std::filesystem::path test;  // optional
};

struct DataSources {
  std::map<std::string, FeatureSetSource> feature_sets;
  std::filesystem::path labels;  // shared by every file-backed feature set
  std::string default_feature_set;
  Standardization standardization = Standardization::kNone;

  // Loads (or generates), joins, and standardizes one feature set.
  SplitDataset Load(const std::string& feature_set, Standardization mode) const;
  // Files read by Load(feature_set), keyed by role.
  std::map<std::string, std::filesystem::path> InputFiles(
      const std::string& feature_set) const;
};

// `data` section of a config file:
//   {"synthetic": {...}}  or
//   {"feature_sets": {"name": {"train": p, "val": p, "test": p} | {"synthetic": {...}}},
//    "labels": p, "feature_set": "name", "standardization": "none|zscore|minmax"}
// Relative paths resolve against `base_dir`.
DataSources ParseDataSources(const json& j, const std::filesystem::path& base_dir);

enum class SweepAxis { kSeed, kBatchSize, kFeatureSet, kStandardization };
enum class Aggregation { kMeanStd, kBest };

const char* ToString(SweepAxis a);
const char* ToString(Aggregation a);
SweepAxis ParseSweepAxis(const std::string& s);
Aggregation ParseAggregation(const std::string& s);

struct SweepSpec {
  SweepAxis axis = SweepAxis::kSeed;
  std::vector<std::string> values;
  std::size_t runs_per_cell = 5;
  Aggregation aggregation = Aggregation::kMeanStd;
  TrainConfig base;
  DataSources data;

  void Validate() const;
};

// Sweep file: {"axis", "values", "runs_per_cell", "aggregation", "train", "data"}.
SweepSpec ParseSweepSpec(const json& j, const std::filesystem::path& base_dir);

// Result of one (cell, run) training job. `metrics` is the val bundle of
// the selected (best) epoch.
struct RunOutcome {
  std::string cell;
  std::size_t cell_index = 0;
  std::size_t run_index = 0;
  std::uint64_t run_seed = 0;
  bool ok = false;
  std::string error;
  ErrorKind error_kind = ErrorKind::kNumerical;
  MetricsBundle metrics;
  std::size_t best_epoch = 0;
  std::size_t epochs_run = 0;
};

struct Stat {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation across runs
};

struct ReportRow {
  std::string label;
  Stat ccc;
  Stat uar;
  Stat inv_mae;
  Stat s_mtl;
  std::size_t runs_ok = 0;
  std::size_t runs_failed = 0;
  bool best = false;
  std::optional<std::size_t> selected_run;  // kBest aggregation only
  std::optional<std::uint64_t> selected_seed;
};

struct ReportTable {
  SweepAxis axis = SweepAxis::kSeed;
  Aggregation aggregation = Aggregation::kMeanStd;
  std::vector<ReportRow> rows;
  std::vector<RunOutcome> failures;
};

// Per-cell aggregation. Under kMeanStd every column is the mean (and
// population std) over successful runs, S_MTL included; under kBest the row
// copies the run with the highest S_MTL (ties: lowest run index). The row
// with the highest S_MTL is marked best (ties: first row).
ReportTable Aggregate(SweepAxis axis, Aggregation aggregation,
                      const std::vector<std::string>& cells,
                      const std::vector<RunOutcome>& runs);

struct SweepResult {
  ReportTable table;
  std::vector<RunOutcome> runs;  // cell-major, run-minor order
  bool all_ok() const { return table.failures.empty(); }
};

// Runs every (cell, run) job on up to `workers` threads. A failing run is
// recorded and the sweep continues. Output does not depend on `workers`.
SweepResult RunSweep(const SweepSpec& spec, std::size_t workers = 1);

// Sweep results as JSON (axis, aggregation, cells, per-run outcomes), and
// back. The reader rebuilds the table through Aggregate.
json SweepResultToJson(const SweepResult& result, const std::vector<std::string>& cells);
SweepResult SweepResultFromJson(const json& j);

// Scores a predictions CSV against a labels CSV joined by id. Unless
// `allow_extra_labels`, the id sets must match exactly (the error lists the
// symmetric difference); with it, labels without predictions are ignored.
MetricsBundle ScoreFiles(const std::filesystem::path& predictions,
                         const std::filesystem::path& labels,
                         bool allow_extra_labels = false);
MetricsBundle Score(const PredictionTable& predictions, const LabelTable& labels,
                    bool allow_extra_labels = false);

}  // namespace vbmtl

#endif  // VBMTL_HARNESS_HPP_
