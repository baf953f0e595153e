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

// vbmtl: train, evaluate, score and sweep the multitask emotion/age/country
// model over precomputed acoustic embeddings.
//
// Exit codes: 0 success, 1 usage/config error, 2 data error, 3 numerical
// failure.

#include <algorithm>
#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <string>

#include "vbmtl/checkpoint.hpp"
#include "vbmtl/data.hpp"
#include "vbmtl/error.hpp"
#include "vbmtl/harness.hpp"
#include "vbmtl/json_io.hpp"
#include "vbmtl/manifest.hpp"
#include "vbmtl/report.hpp"
#include "vbmtl/synth.hpp"
#include "vbmtl/train.hpp"

namespace fs = std::filesystem;
using vbmtl::json;

namespace {

json ReadJsonFile(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw vbmtl::ConfigError("cannot open config " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw vbmtl::ConfigError(path.string() + ": " + e.what());
  }
}

void WriteText(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw vbmtl::DataError("cannot write " + path.string());
  out << text;
}

std::size_t WorkersFromEnv() {
  const char* env = std::getenv("VBMTL_WORKERS");
  if (env == nullptr || *env == '\0') return 1;
  try {
    const long v = std::stol(env);
    return v > 0 ? static_cast<std::size_t>(v) : 1;
  } catch (const std::exception&) {
    throw vbmtl::ConfigError("VBMTL_WORKERS must be a positive integer");
  }
}

struct TrainArgs {
  fs::path config;
  fs::path out = "run";
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> run_index;
  std::optional<std::size_t> batch_size;
  std::optional<double> learning_rate;
  std::optional<std::size_t> max_epochs;
  std::optional<std::size_t> patience;
  std::optional<std::string> feature_set;
  std::optional<std::string> standardization;
  bool quiet = false;
};

int RunTrain(const TrainArgs& args) {
  const json cfg = ReadJsonFile(args.config);
  vbmtl::RequireKeys(cfg, {"train", "data"}, args.config.string().c_str());
  vbmtl::TrainConfig train;
  if (cfg.contains("train")) train = cfg.at("train").get<vbmtl::TrainConfig>();
  if (!cfg.contains("data")) throw vbmtl::ConfigError("config needs a 'data' section");
  const auto sources = vbmtl::ParseDataSources(cfg.at("data"), args.config.parent_path());

  if (args.seed) train.seed = *args.seed;
  if (args.run_index) train.run_index = *args.run_index;
  if (args.batch_size) train.batch_size = *args.batch_size;
  if (args.learning_rate) train.learning_rate = *args.learning_rate;
  if (args.max_epochs) {
    train.max_epochs = *args.max_epochs;
    if (!args.patience) train.patience = std::min(train.patience, train.max_epochs);
  }
  if (args.patience) train.patience = *args.patience;
  const std::string feature_set = args.feature_set.value_or(sources.default_feature_set);
  const auto mode = args.standardization
                        ? vbmtl::ParseStandardization(*args.standardization)
                        : sources.standardization;

  const auto data = sources.Load(feature_set, mode);
  train.model.input_dim = data.train.features.cols();

  json timing = json::array();
  const auto result = vbmtl::TrainRun(train, data, [&](const vbmtl::EpochRecord& e) {
    timing.push_back({{"epoch", e.epoch}, {"seconds", e.seconds}});
    if (!args.quiet)
      std::cerr << "epoch " << e.epoch << "  loss " << e.train_loss.total << "  val S_MTL "
                << e.val.s_mtl << '\n';
  });
  const auto& history = result.history;
  const auto& best = history.epochs.at(history.best_epoch - 1).val;

  const vbmtl::Checkpoint ckpt{train.model, data.age_scaler, data.standardizer,
                               result.best_params};
  vbmtl::SaveCheckpoint(ckpt, args.out / "checkpoint.bin");
  WriteText(args.out / "history.json", json(history).dump(2) + "\n");
  WriteText(args.out / "timing.json", timing.dump(2) + "\n");

  json manifest = vbmtl::MakeRunManifest(train, sources.InputFiles(feature_set), best);
  manifest["feature_set"] = feature_set;
  manifest["standardization"] = vbmtl::ToString(mode);
  manifest["best_epoch"] = history.best_epoch;
  manifest["checkpoint_sha1"] = vbmtl::GitBlobHash(vbmtl::SerializeCheckpoint(ckpt));
  const auto& src = sources.feature_sets.at(feature_set);
  if (src.synthetic) manifest["synthetic"] = *src.synthetic;
  WriteText(args.out / "manifest.json", manifest.dump(2) + "\n");

  auto predict = [&](const vbmtl::Partition& p, const char* name) {
    const auto preds =
        vbmtl::PredictPartition(result.best_params, train.model, p, data.age_scaler);
    vbmtl::SavePredictionsCsv(vbmtl::MakePredictionTable(p.ids, preds),
                              args.out / (std::string(name) + "_predictions.csv"));
  };
  predict(data.val, "val");
  if (data.test.size() > 0) predict(data.test, "test");

  std::cout << json{{"best_epoch", history.best_epoch},
                    {"epochs_run", history.epochs.size()},
                    {"val", best}}
                   .dump(2)
            << '\n';
  return 0;
}

int RunEval(const fs::path& checkpoint, const fs::path& features, const fs::path& labels,
            const std::optional<fs::path>& predictions_out) {
  const auto ckpt = vbmtl::LoadCheckpoint(checkpoint);
  const auto table = vbmtl::LoadFeatures(features);
  const auto x = ckpt.standardizer.Apply(table.features);
  const auto preds = vbmtl::Predict(ckpt.params, ckpt.config, x, ckpt.age_scaler);
  const auto pred_table = vbmtl::MakePredictionTable(table.ids, preds);
  if (predictions_out) vbmtl::SavePredictionsCsv(pred_table, *predictions_out);
  const auto metrics = vbmtl::Score(pred_table, vbmtl::LoadLabels(labels), true);
  std::cout << json(metrics).dump(2) << '\n';
  return 0;
}

int RunScore(const fs::path& predictions, const fs::path& labels, bool allow_extra) {
  std::cout << json(vbmtl::ScoreFiles(predictions, labels, allow_extra)).dump(2) << '\n';
  return 0;
}

int FirstFailureCode(const vbmtl::SweepResult& result) {
  if (result.all_ok()) return 0;
  return vbmtl::ExitCode(result.table.failures.front().error_kind);
}

void WriteSweepOutputs(const vbmtl::SweepResult& result,
                       const std::vector<std::string>& cells, const fs::path& out) {
  vbmtl::EmitReport(result.table, vbmtl::ReportFormat::kMarkdown, out / "report.md");
  vbmtl::EmitReport(result.table, vbmtl::ReportFormat::kCsv, out / "report.csv");
  WriteText(out / "runs_raw.csv", vbmtl::RenderRunsCsv(result.runs));
  WriteText(out / "results.json", vbmtl::SweepResultToJson(result, cells).dump(2) + "\n");
}

int RunSweepCommand(const fs::path& config, const fs::path& out,
                    std::optional<std::size_t> workers, const std::string& format) {
  const auto fmt = vbmtl::ParseReportFormat(format);
  const auto spec = vbmtl::ParseSweepSpec(ReadJsonFile(config), config.parent_path());
  const auto result = vbmtl::RunSweep(spec, workers.value_or(WorkersFromEnv()));
  WriteSweepOutputs(result, spec.values, out);
  std::cout << vbmtl::Render(result.table, fmt);
  return FirstFailureCode(result);
}

int RunSynth(vbmtl::SynthSpec spec, const std::optional<fs::path>& config,
             const fs::path& out, const std::string& format) {
  if (config) spec = ReadJsonFile(*config).get<vbmtl::SynthSpec>();
  if (format != "csv" && format != "bin")
    throw vbmtl::ConfigError("synth format must be csv or bin");
  const auto tables = vbmtl::MakeSynthTables(spec);
  auto save = [&](const vbmtl::FeatureTable& t, const std::string& name) {
    const fs::path p = out / (name + "_features." + format);
    if (format == "csv") {
      vbmtl::SaveFeaturesCsv(t, p);
    } else {
      vbmtl::SaveFeaturesBinary(t, p);
    }
    return p.filename().string();
  };
  json sets = {{"train", save(tables.train, "train")}, {"val", save(tables.val, "val")}};
  if (spec.n_test > 0) sets["test"] = save(tables.test, "test");
  vbmtl::SaveLabelsCsv(tables.labels, out / "labels.csv");
  const json data = {{"feature_sets", {{"synthetic", sets}}}, {"labels", "labels.csv"}};
  WriteText(out / "data.json", json{{"data", data}}.dump(2) + "\n");
  WriteText(out / "synth_spec.json", json(spec).dump(2) + "\n");
  std::cout << "wrote " << (spec.n_train + spec.n_val + spec.n_test) << " samples to "
            << out.string() << '\n';
  return 0;
}

int RunReport(const fs::path& results, const std::string& format,
              const std::optional<fs::path>& out) {
  const auto fmt = vbmtl::ParseReportFormat(format);
  const auto result = vbmtl::SweepResultFromJson(ReadJsonFile(results));
  if (out) {
    vbmtl::EmitReport(result.table, fmt, *out);
  } else {
    if (result.table.rows.empty()) throw vbmtl::DataError("no rows to report");
    std::cout << vbmtl::Render(result.table, fmt);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multitask emotion / age / country trainer and evaluator"};
  app.require_subcommand(1);

  TrainArgs train_args;
  auto* train = app.add_subcommand("train", "Train one model");
  train->add_option("-c,--config", train_args.config, "JSON with 'train' and 'data'")
      ->required()
      ->check(CLI::ExistingFile);
  train->add_option("-o,--out", train_args.out, "Output directory");
  train->add_option("--seed", train_args.seed);
  train->add_option("--run-index", train_args.run_index);
  train->add_option("--batch-size", train_args.batch_size);
  train->add_option("--learning-rate", train_args.learning_rate);
  train->add_option("--max-epochs", train_args.max_epochs);
  train->add_option("--patience", train_args.patience);
  train->add_option("--feature-set", train_args.feature_set);
  train->add_option("--standardization", train_args.standardization);
  train->add_flag("-q,--quiet", train_args.quiet);

  fs::path ckpt_path, features_path, labels_path, predictions_path, sweep_config,
      results_path;
  std::optional<fs::path> predictions_out, report_out, synth_config;
  fs::path out_dir = "out";
  bool allow_extra = false;
  std::optional<std::size_t> workers;
  std::string format = "markdown", synth_format = "csv";

  auto* eval = app.add_subcommand("eval", "Score a checkpoint on a feature file");
  eval->add_option("--checkpoint", ckpt_path)->required()->check(CLI::ExistingFile);
  eval->add_option("--features", features_path)->required()->check(CLI::ExistingFile);
  eval->add_option("--labels", labels_path)->required()->check(CLI::ExistingFile);
  eval->add_option("--predictions-out", predictions_out);

  auto* score = app.add_subcommand("score", "Score a predictions CSV");
  score->add_option("--predictions", predictions_path)->required()->check(CLI::ExistingFile);
  score->add_option("--labels", labels_path)->required()->check(CLI::ExistingFile);
  score->add_flag("--allow-extra-labels", allow_extra,
                  "Ignore labels whose id has no prediction");

  auto* sweep = app.add_subcommand("sweep", "Run a sweep file and write reports");
  sweep->add_option("-c,--config", sweep_config)->required()->check(CLI::ExistingFile);
  sweep->add_option("-o,--out", out_dir);
  sweep->add_option("-j,--workers", workers, "Worker threads (default: $VBMTL_WORKERS or 1)");
  sweep->add_option("--format", format, "markdown or csv (stdout)");

  vbmtl::SynthSpec synth_spec;
  auto* synth = app.add_subcommand("synth", "Write a planted synthetic dataset");
  synth->add_option("-c,--config", synth_config, "JSON SynthSpec (overrides flags)");
  synth->add_option("-o,--out", out_dir);
  synth->add_option("--format", synth_format, "csv or bin");
  synth->add_option("--n-train", synth_spec.n_train);
  synth->add_option("--n-val", synth_spec.n_val);
  synth->add_option("--n-test", synth_spec.n_test);
  synth->add_option("--dim", synth_spec.dim);
  synth->add_option("--rank", synth_spec.rank);
  synth->add_option("--seed", synth_spec.seed);

  auto* report = app.add_subcommand("report", "Re-render stored sweep results");
  report->add_option("--results", results_path)->required()->check(CLI::ExistingFile);
  report->add_option("--format", format, "markdown or csv");
  report->add_option("-o,--out", report_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : vbmtl::ExitCode(vbmtl::ErrorKind::kUsage);
  }

  try {
    if (*train) return RunTrain(train_args);
    if (*eval) return RunEval(ckpt_path, features_path, labels_path, predictions_out);
    if (*score) return RunScore(predictions_path, labels_path, allow_extra);
    if (*sweep) return RunSweepCommand(sweep_config, out_dir, workers, format);
    if (*synth) return RunSynth(synth_spec, synth_config, out_dir, synth_format);
    if (*report) return RunReport(results_path, format, report_out);
  } catch (const vbmtl::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return vbmtl::ExitCode(e.kind());
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return vbmtl::ExitCode(vbmtl::ErrorKind::kUsage);
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return vbmtl::ExitCode(vbmtl::ErrorKind::kData);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return vbmtl::ExitCode(vbmtl::ErrorKind::kNumerical);
  }
  return 0;
}
