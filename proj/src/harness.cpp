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

#include "vbmtl/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_map>

namespace vbmtl {

namespace {

std::filesystem::path Resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

std::string GetString(const json& j, const char* key, const char* context) {
  if (!j.contains(key) || !j.at(key).is_string())
    throw ConfigError(std::string(context) + ": '" + key + "' must be a string");
  return j.at(key).get<std::string>();
}

}  // namespace

SplitDataset DataSources::Load(const std::string& feature_set, Standardization mode) const {
  auto it = feature_sets.find(feature_set);
  if (it == feature_sets.end())
    throw ConfigError("unknown feature set '" + feature_set + "'");
  const FeatureSetSource& src = it->second;
  if (src.synthetic) return Standardize(SynthDataset(*src.synthetic), mode);

  const auto train = LoadFeatures(src.train);
  const auto val = LoadFeatures(src.val);
  std::optional<FeatureTable> test;
  if (!src.test.empty()) test = LoadFeatures(src.test);
  return Standardize(JoinSplits(train, val, test, LoadLabels(labels)), mode);
}

std::map<std::string, std::filesystem::path> DataSources::InputFiles(
    const std::string& feature_set) const {
  std::map<std::string, std::filesystem::path> files;
  auto it = feature_sets.find(feature_set);
  if (it == feature_sets.end() || it->second.synthetic) return files;
  files["train_features"] = it->second.train;
  files["val_features"] = it->second.val;
  if (!it->second.test.empty()) files["test_features"] = it->second.test;
  files["labels"] = labels;
  return files;
}

DataSources ParseDataSources(const json& j, const std::filesystem::path& base_dir) {
  RequireKeys(j, {"synthetic", "feature_sets", "labels", "feature_set", "standardization"},
              "data");
  DataSources d;
  if (j.contains("standardization"))
    d.standardization = ParseStandardization(GetString(j, "standardization", "data"));
  if (j.contains("labels")) d.labels = Resolve(base_dir, GetString(j, "labels", "data"));

  if (j.contains("synthetic")) {
    FeatureSetSource src;
    src.synthetic = j.at("synthetic").get<SynthSpec>();
    d.feature_sets["synthetic"] = std::move(src);
    d.default_feature_set = "synthetic";
  }
  if (j.contains("feature_sets")) {
    const json& sets = j.at("feature_sets");
    if (!sets.is_object()) throw ConfigError("data.feature_sets must be an object");
    for (const auto& [name, entry] : sets.items()) {
      RequireKeys(entry, {"synthetic", "train", "val", "test"}, "data.feature_sets entry");
      FeatureSetSource src;
      if (entry.contains("synthetic")) {
        src.synthetic = entry.at("synthetic").get<SynthSpec>();
      } else {
        src.train = Resolve(base_dir, GetString(entry, "train", "feature set"));
        src.val = Resolve(base_dir, GetString(entry, "val", "feature set"));
        if (entry.contains("test"))
          src.test = Resolve(base_dir, GetString(entry, "test", "feature set"));
        if (d.labels.empty())
          throw ConfigError("data.labels is required for file-backed feature sets");
      }
      d.feature_sets[name] = std::move(src);
      if (d.default_feature_set.empty()) d.default_feature_set = name;
    }
  }
  if (j.contains("feature_set")) d.default_feature_set = GetString(j, "feature_set", "data");
  if (d.feature_sets.empty())
    throw ConfigError("data: give either 'synthetic' or 'feature_sets'");
  if (!d.feature_sets.contains(d.default_feature_set))
    throw ConfigError("data.feature_set '" + d.default_feature_set + "' is not defined");
  return d;
}

const char* ToString(SweepAxis a) {
  switch (a) {
    case SweepAxis::kSeed: return "seed";
    case SweepAxis::kBatchSize: return "batch_size";
    case SweepAxis::kFeatureSet: return "feature_set";
    case SweepAxis::kStandardization: return "standardization";
  }
  return "seed";
}

const char* ToString(Aggregation a) {
  return a == Aggregation::kMeanStd ? "mean_std" : "best";
}

SweepAxis ParseSweepAxis(const std::string& s) {
  for (auto a : {SweepAxis::kSeed, SweepAxis::kBatchSize, SweepAxis::kFeatureSet,
                 SweepAxis::kStandardization})
    if (s == ToString(a)) return a;
  throw ConfigError("unknown sweep axis '" + s + "'");
}

Aggregation ParseAggregation(const std::string& s) {
  if (s == "mean_std") return Aggregation::kMeanStd;
  if (s == "best") return Aggregation::kBest;
  throw ConfigError("unknown aggregation '" + s + "'");
}

namespace {

std::uint64_t ParseUnsigned(const std::string& s, const char* what) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty() || s[0] == '-')
    throw ConfigError(std::string("sweep value '") + s + "' is not a valid " + what);
  return v;
}

struct CellSetup {
  TrainConfig config;
  std::string feature_set;
  Standardization standardization;
};

CellSetup SetupCell(const SweepSpec& spec, const std::string& value) {
  CellSetup c{spec.base, spec.data.default_feature_set, spec.data.standardization};
  switch (spec.axis) {
    case SweepAxis::kSeed: c.config.seed = ParseUnsigned(value, "seed"); break;
    case SweepAxis::kBatchSize:
      c.config.batch_size = ParseUnsigned(value, "batch size");
      break;
    case SweepAxis::kFeatureSet: c.feature_set = value; break;
    case SweepAxis::kStandardization:
      c.standardization = ParseStandardization(value);
      break;
  }
  return c;
}

}  // namespace

void SweepSpec::Validate() const {
  if (values.empty()) throw ConfigError("sweep: values must be non-empty");
  if (runs_per_cell == 0) throw ConfigError("sweep: runs_per_cell must be >= 1");
  std::set<std::string> unique(values.begin(), values.end());
  if (unique.size() != values.size()) throw ConfigError("sweep: duplicate values");
  for (const auto& v : values) {
    const auto cell = SetupCell(*this, v);
    if (!data.feature_sets.contains(cell.feature_set))
      throw ConfigError("sweep: unknown feature set '" + cell.feature_set + "'");
    if (cell.config.batch_size == 0) throw ConfigError("sweep: batch size must be >= 1");
  }
}

SweepSpec ParseSweepSpec(const json& j, const std::filesystem::path& base_dir) {
  RequireKeys(j, {"axis", "values", "runs_per_cell", "aggregation", "train", "data"},
              "sweep");
  SweepSpec s;
  s.axis = ParseSweepAxis(GetString(j, "axis", "sweep"));
  if (!j.contains("values") || !j.at("values").is_array())
    throw ConfigError("sweep: 'values' must be an array");
  for (const auto& v : j.at("values"))
    s.values.push_back(v.is_string() ? v.get<std::string>() : v.dump());
  if (j.contains("runs_per_cell")) s.runs_per_cell = j.at("runs_per_cell").get<std::size_t>();
  if (j.contains("aggregation"))
    s.aggregation = ParseAggregation(GetString(j, "aggregation", "sweep"));
  if (j.contains("train")) s.base = j.at("train").get<TrainConfig>();
  if (!j.contains("data")) throw ConfigError("sweep: 'data' section is required");
  s.data = ParseDataSources(j.at("data"), base_dir);
  s.Validate();
  return s;
}

ReportTable Aggregate(SweepAxis axis, Aggregation aggregation,
                      const std::vector<std::string>& cells,
                      const std::vector<RunOutcome>& runs) {
  ReportTable table{axis, aggregation, {}, {}};
  for (std::size_t c = 0; c < cells.size(); ++c) {
    ReportRow row;
    row.label = cells[c];
    std::vector<const RunOutcome*> ok;
    for (const auto& r : runs) {
      if (r.cell_index != c) continue;
      if (r.ok) {
        ok.push_back(&r);
      } else {
        ++row.runs_failed;
        table.failures.push_back(r);
      }
    }
    row.runs_ok = ok.size();
    if (!ok.empty()) {
      if (aggregation == Aggregation::kMeanStd) {
        auto stat = [&ok](auto field) {
          Stat s;
          for (const auto* r : ok) s.mean += field(r->metrics);
          s.mean /= static_cast<double>(ok.size());
          for (const auto* r : ok) {
            const double d = field(r->metrics) - s.mean;
            s.std += d * d;
          }
          s.std = std::sqrt(s.std / static_cast<double>(ok.size()));
          return s;
        };
        row.ccc = stat([](const MetricsBundle& m) { return m.mean_ccc; });
        row.uar = stat([](const MetricsBundle& m) { return m.uar; });
        row.inv_mae = stat([](const MetricsBundle& m) { return m.inv_mae; });
        row.s_mtl = stat([](const MetricsBundle& m) { return m.s_mtl; });
      } else {
        const RunOutcome* winner = ok.front();
        for (const auto* r : ok)
          if (r->metrics.s_mtl > winner->metrics.s_mtl) winner = r;
        row.ccc.mean = winner->metrics.mean_ccc;
        row.uar.mean = winner->metrics.uar;
        row.inv_mae.mean = winner->metrics.inv_mae;
        row.s_mtl.mean = winner->metrics.s_mtl;
        row.selected_run = winner->run_index;
        row.selected_seed = winner->run_seed;
      }
    }
    table.rows.push_back(std::move(row));
  }
  ReportRow* best = nullptr;
  for (auto& row : table.rows)
    if (row.runs_ok > 0 && (!best || row.s_mtl.mean > best->s_mtl.mean)) best = &row;
  if (best) best->best = true;
  return table;
}

SweepResult RunSweep(const SweepSpec& spec, std::size_t workers) {
  spec.Validate();
  const std::size_t n_cells = spec.values.size();

  // Datasets are loaded up front, sequentially, and shared read-only.
  std::vector<CellSetup> setups;
  std::map<std::pair<std::string, Standardization>, std::shared_ptr<const SplitDataset>>
      datasets;
  std::vector<std::shared_ptr<const SplitDataset>> cell_data(n_cells);
  std::vector<std::optional<Error>> cell_error(n_cells);
  for (std::size_t c = 0; c < n_cells; ++c) {
    setups.push_back(SetupCell(spec, spec.values[c]));
    const auto key = std::make_pair(setups[c].feature_set, setups[c].standardization);
    try {
      auto it = datasets.find(key);
      if (it == datasets.end()) {
        auto ds = std::make_shared<const SplitDataset>(
            spec.data.Load(key.first, key.second));
        it = datasets.emplace(key, std::move(ds)).first;
      }
      cell_data[c] = it->second;
      setups[c].config.model.input_dim = cell_data[c]->train.features.cols();
    } catch (const Error& e) {
      cell_error[c] = e;
    }
  }

  SweepResult result;
  result.runs.resize(n_cells * spec.runs_per_cell);
  auto run_job = [&](std::size_t job) {
    const std::size_t c = job / spec.runs_per_cell;
    const std::size_t r = job % spec.runs_per_cell;
    RunOutcome& out = result.runs[job];
    out.cell = spec.values[c];
    out.cell_index = c;
    out.run_index = r;
    TrainConfig cfg = setups[c].config;
    cfg.run_index = r;
    out.run_seed = DeriveSeed(cfg.seed, cfg.run_index);
    if (cell_error[c]) {
      out.error = cell_error[c]->what();
      out.error_kind = cell_error[c]->kind();
      return;
    }
    try {
      const auto trained = TrainRun(cfg, *cell_data[c]);
      const auto& h = trained.history;
      out.metrics = h.epochs.at(h.best_epoch - 1).val;
      out.best_epoch = h.best_epoch;
      out.epochs_run = h.epochs.size();
      out.ok = true;
    } catch (const Error& e) {
      out.error = e.what();
      out.error_kind = e.kind();
    } catch (const std::exception& e) {
      out.error = e.what();
      out.error_kind = ErrorKind::kNumerical;
    }
  };

  const std::size_t jobs = result.runs.size();
  const std::size_t n_threads = std::max<std::size_t>(1, std::min(workers, jobs));
  if (n_threads == 1) {
    for (std::size_t j = 0; j < jobs; ++j) run_job(j);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n_threads; ++t)
      pool.emplace_back([&] {
        for (std::size_t j = next++; j < jobs; j = next++) run_job(j);
      });
  }

  result.table = Aggregate(spec.axis, spec.aggregation, spec.values, result.runs);
  return result;
}

json SweepResultToJson(const SweepResult& result, const std::vector<std::string>& cells) {
  json runs = json::array();
  for (const auto& r : result.runs)
    runs.push_back({{"cell", r.cell},
                    {"cell_index", r.cell_index},
                    {"run_index", r.run_index},
                    {"run_seed", r.run_seed},
                    {"ok", r.ok},
                    {"error", r.error},
                    {"error_kind", static_cast<int>(r.error_kind)},
                    {"metrics", r.metrics},
                    {"best_epoch", r.best_epoch},
                    {"epochs_run", r.epochs_run}});
  return json{{"axis", ToString(result.table.axis)},
              {"aggregation", ToString(result.table.aggregation)},
              {"cells", cells},
              {"runs", std::move(runs)}};
}

SweepResult SweepResultFromJson(const json& j) {
  try {
    SweepResult result;
    for (const auto& r : j.at("runs")) {
      RunOutcome o;
      o.cell = r.at("cell").get<std::string>();
      o.cell_index = r.at("cell_index").get<std::size_t>();
      o.run_index = r.at("run_index").get<std::size_t>();
      o.run_seed = r.at("run_seed").get<std::uint64_t>();
      o.ok = r.at("ok").get<bool>();
      o.error = r.at("error").get<std::string>();
      o.error_kind = static_cast<ErrorKind>(r.at("error_kind").get<int>());
      o.metrics = r.at("metrics").get<MetricsBundle>();
      o.best_epoch = r.at("best_epoch").get<std::size_t>();
      o.epochs_run = r.at("epochs_run").get<std::size_t>();
      result.runs.push_back(std::move(o));
    }
    result.table = Aggregate(ParseSweepAxis(j.at("axis").get<std::string>()),
                             ParseAggregation(j.at("aggregation").get<std::string>()),
                             j.at("cells").get<std::vector<std::string>>(), result.runs);
    return result;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed sweep results: ") + e.what());
  }
}

MetricsBundle Score(const PredictionTable& predictions, const LabelTable& labels,
                    bool allow_extra_labels) {
  std::unordered_map<std::string, std::size_t> label_index;
  for (std::size_t i = 0; i < labels.ids.size(); ++i) label_index.emplace(labels.ids[i], i);
  std::unordered_map<std::string, std::size_t> pred_index;
  for (std::size_t i = 0; i < predictions.ids.size(); ++i)
    pred_index.emplace(predictions.ids[i], i);

  std::vector<std::string> only_pred, only_label;
  for (const auto& id : predictions.ids)
    if (!label_index.contains(id)) only_pred.push_back(id);
  if (!allow_extra_labels)
    for (const auto& id : labels.ids)
      if (!pred_index.contains(id)) only_label.push_back(id);
  if (!only_pred.empty() || !only_label.empty()) {
    std::sort(only_pred.begin(), only_pred.end());
    std::sort(only_label.begin(), only_label.end());
    std::ostringstream os;
    os << "prediction/label id mismatch;";
    auto list = [&os](const char* what, const std::vector<std::string>& ids) {
      if (ids.empty()) return;
      os << ' ' << what << " (" << ids.size() << "):";
      for (std::size_t i = 0; i < ids.size() && i < 20; ++i) os << ' ' << ids[i];
      if (ids.size() > 20) os << " ...";
    };
    list("only in predictions", only_pred);
    list("only in labels", only_label);
    throw DataError(os.str());
  }

  std::vector<std::string> ids = predictions.ids;
  std::sort(ids.begin(), ids.end());
  std::vector<std::size_t> prow, lrow;
  for (const auto& id : ids) {
    prow.push_back(pred_index.at(id));
    lrow.push_back(label_index.at(id));
  }
  std::vector<double> age_pred, age_true;
  std::vector<int> country_pred, country_true;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    age_pred.push_back(predictions.age_years[prow[i]]);
    age_true.push_back(static_cast<double>(labels.age[lrow[i]]));
    country_pred.push_back(predictions.country[prow[i]]);
    country_true.push_back(labels.country[lrow[i]]);
  }
  return ComputeMetrics(predictions.emotion.GatherRows(prow), labels.emotion.GatherRows(lrow),
                        age_pred, age_true, country_pred, country_true,
                        static_cast<int>(kNumCountries));
}

MetricsBundle ScoreFiles(const std::filesystem::path& predictions,
                         const std::filesystem::path& labels, bool allow_extra_labels) {
  return Score(LoadPredictionsCsv(predictions), LoadLabels(labels), allow_extra_labels);
}

}  // namespace vbmtl
