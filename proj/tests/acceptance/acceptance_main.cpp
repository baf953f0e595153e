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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails. Usage: acceptance [criterion ...]
// [--out DIR] where DIR receives the sweep reports of criterion 5.
// Worker threads for sweeps come from VBMTL_WORKERS (default: all cores).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "oracles.hpp"
#include "published_fixtures.hpp"
#include "ridge_oracle.hpp"
#include "vbmtl/checkpoint.hpp"
#include "vbmtl/grad_check.hpp"
#include "vbmtl/harness.hpp"
#include "vbmtl/json_io.hpp"
#include "vbmtl/layers.hpp"
#include "vbmtl/loss.hpp"
#include "vbmtl/metrics.hpp"
#include "vbmtl/model.hpp"
#include "vbmtl/report.hpp"
#include "vbmtl/synth.hpp"
#include "vbmtl/train.hpp"

namespace vbmtl {
namespace {

namespace fs = std::filesystem;
using testing::RandomMatrix;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string Fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

std::size_t Workers() {
  if (const char* env = std::getenv("VBMTL_WORKERS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n > 0) return static_cast<std::size_t>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// ---------------------------------------------------------------- 1

Verdict PublishedScoreConsistency() {
  const auto dir = fs::temp_directory_path() / "vbmtl_acceptance_published";
  std::size_t ok = 0;
  std::string misses;
  for (const auto& row : testing::kPublishedRows) {
    const double direct = SMtl(row.ccc, row.uar, row.inv_mae).value;
    const auto files = testing::WriteComponentFiles(row, dir);
    const double scored = ScoreFiles(files.predictions, files.labels).s_mtl;
    const bool row_ok =
        std::abs(direct - row.s_mtl) <= 0.0015 && std::abs(scored - row.s_mtl) <= 0.0015;
    if (row_ok) {
      ++ok;
    } else {
      misses += std::string(misses.empty() ? "" : "; ") + row.name + " computes " +
                Fmt("%.4f", direct) + " vs printed " + Fmt("%.3f", row.s_mtl);
    }
  }
  fs::remove_all(dir);
  std::string detail = std::to_string(ok) + "/9 rows within ±0.0015";
  if (!misses.empty()) detail += " (" + misses + ")";
  return {ok == 9, detail};
}

// ---------------------------------------------------------------- 2

double Dot(const Matrix& a, const Matrix& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a.values()[i] * b.values()[i];
  return s;
}

std::vector<double> Concat(std::initializer_list<const Matrix*> ms) {
  std::vector<double> v;
  for (const Matrix* m : ms) v.insert(v.end(), m->values().begin(), m->values().end());
  return v;
}

std::vector<Matrix> Split(std::span<const double> flat, const std::vector<Matrix>& like) {
  std::vector<Matrix> out = like;
  std::size_t o = 0;
  for (auto& m : out)
    for (double& v : m.values()) v = flat[o++];
  return out;
}

void Scatter(std::span<double> grad, std::initializer_list<const Matrix*> ms) {
  std::size_t o = 0;
  for (const Matrix* m : ms)
    for (double v : m->values()) grad[o++] = v;
}

double LayerChecks() {
  RngStream rng(2024);
  double worst = 0.0;
  {
    const std::vector<Matrix> p{RandomMatrix(5, 6, rng), RandomMatrix(6, 4, rng),
                                RandomMatrix(1, 4, rng)};
    const auto r = RandomMatrix(5, 4, rng);
    Objective f = [&](std::span<const double> flat, std::span<double> grad) {
      const auto m = Split(flat, p);
      const auto fwd = LinearForward(m[0], m[1], m[2]);
      if (!grad.empty()) {
        const auto g = LinearBackward(fwd.cache, m[1], r);
        Scatter(grad, {&g.d_input, &g.d_weight, &g.d_bias});
      }
      return Dot(fwd.output, r);
    };
    worst = std::max(worst, GradCheck(f, Concat({&p[0], &p[1], &p[2]})).max_relative_error);
  }
  {
    const std::vector<Matrix> p{RandomMatrix(5, 7, rng), RandomMatrix(1, 7, rng, 0.5, 1.5),
                                RandomMatrix(1, 7, rng)};
    const auto r = RandomMatrix(5, 7, rng);
    Objective f = [&](std::span<const double> flat, std::span<double> grad) {
      const auto m = Split(flat, p);
      const auto fwd = LayerNormForward(m[0], m[1], m[2], 1e-5);
      if (!grad.empty()) {
        const auto g = LayerNormBackward(fwd.cache, m[1], r);
        Scatter(grad, {&g.d_input, &g.d_gamma, &g.d_beta});
      }
      return Dot(fwd.output, r);
    };
    worst = std::max(worst, GradCheck(f, Concat({&p[0], &p[1], &p[2]})).max_relative_error);
  }
  {
    const auto x = RandomMatrix(6, 6, rng);
    const auto r = RandomMatrix(6, 6, rng);
    const auto flat = Concat({&x});
    Objective f = [&](std::span<const double> v, std::span<double> grad) {
      const Matrix m(6, 6, std::vector<double>(v.begin(), v.end()));
      const auto fwd = LeakyRelu(m, 0.01);
      if (!grad.empty()) {
        const auto g = LeakyReluBackward(fwd.cache, r);
        Scatter(grad, {&g});
      }
      return Dot(fwd.output, r);
    };
    GradCheckOptions opts;
    opts.skip = [&flat](std::size_t i) { return std::abs(flat[i]) < 1e-4; };
    worst = std::max(worst, GradCheck(f, flat, opts).max_relative_error);
  }
  {
    const auto x = RandomMatrix(4, 5, rng, -4, 4);
    const auto r = RandomMatrix(4, 5, rng);
    Objective f = [&](std::span<const double> v, std::span<double> grad) {
      const Matrix m(4, 5, std::vector<double>(v.begin(), v.end()));
      const auto y = Sigmoid(m);
      if (!grad.empty()) {
        const auto g = SigmoidBackward(y, r);
        Scatter(grad, {&g});
      }
      return Dot(y, r);
    };
    worst = std::max(worst, GradCheck(f, Concat({&x})).max_relative_error);
  }
  {
    const auto logits = RandomMatrix(6, 4, rng, -2, 2);
    const int cls[] = {0, 1, 2, 3, 2, 1};
    Objective f = [&](std::span<const double> v, std::span<double> grad) {
      const auto l = CrossEntropyLoss(Matrix(6, 4, std::vector<double>(v.begin(), v.end())), cls);
      if (!grad.empty()) Scatter(grad, {&l.grad});
      return l.loss;
    };
    worst = std::max(worst, GradCheck(f, Concat({&logits})).max_relative_error);
  }
  return worst;
}

double FullModelCheck(HeadVariant variant, std::uint64_t seed) {
  ModelConfig cfg;
  cfg.input_dim = 6;
  cfg.shared_dims = {5, 4};
  cfg.age_head_dims = {3, 2};
  cfg.emotion_hidden = 3;
  cfg.country_hidden = 3;
  cfg.head_variant = variant;
  RngStream rng(seed);
  auto base = InitParams(cfg, rng);
  base.ForEach([&rng](const std::string&, Matrix& m) {
    for (double& v : m.values()) v += rng.Uniform(-0.3, 0.3);
  });
  const auto x = RandomMatrix(4, 6, rng, -2, 2);
  const OutputGrads r{RandomMatrix(4, 10, rng), RandomMatrix(4, 1, rng), RandomMatrix(4, 4, rng)};
  Objective f = [&](std::span<const double> flat, std::span<double> grad) {
    ModelParams p = base;
    p.Unflatten(flat);
    const auto [out, cache] = Forward(p, cfg, x);
    if (!grad.empty()) {
      const auto g = Backward(p, cfg, cache, r).Flatten();
      std::copy(g.begin(), g.end(), grad.begin());
    }
    return Dot(out.emotion, r.emotion) + Dot(out.age_scaled, r.age_scaled) +
           Dot(out.country_logits, r.country_logits);
  };
  GradCheckOptions opts;
  opts.eps = 1e-5;
  return GradCheck(f, base.Flatten(), opts).max_relative_error;
}

Verdict GradientCorrectness() {
  const double layers = LayerChecks();
  const double two = FullModelCheck(HeadVariant::kTwoLayerAge, 31);
  const double one = FullModelCheck(HeadVariant::kOneHiddenAll, 32);
  return {layers < 1e-5 && two < 1e-4 && one < 1e-4,
          "per-layer max " + Fmt("%.2e", layers) + " (< 1e-5), full model two-layer-age " +
              Fmt("%.2e", two) + ", one-hidden-all " + Fmt("%.2e", one) + " (< 1e-4)"};
}

// ---------------------------------------------------------------- 3

Verdict Determinism() {
  SynthSpec spec;
  spec.n_train = 500;
  spec.n_val = 200;
  const auto ds = SynthDataset(spec);
  TrainConfig cfg;
  cfg.model.input_dim = spec.dim;
  auto run = [&] {
    const auto r = TrainRun(cfg, ds);
    const Checkpoint ckpt{cfg.model, ds.age_scaler, ds.standardizer, r.best_params};
    return std::make_pair(SerializeCheckpoint(ckpt), json(r.history).dump());
  };
  const auto a = run();
  const auto b = run();
  const bool same_ckpt = a.first == b.first;
  const bool same_hist = a.second == b.second;
  return {same_ckpt && same_hist,
          std::string("checkpoint ") + (same_ckpt ? "identical" : "DIFFERS") + " (" +
              std::to_string(a.first.size()) + " bytes), history " +
              (same_hist ? "identical" : "DIFFERS")};
}

// ---------------------------------------------------------------- 4

Verdict Learnability() {
  const SynthSpec spec;  // 2000 train / 500 val, d = 64
  const auto ds = SynthDataset(spec);
  const auto oracle = testing::RidgeCentroidOracle(ds);
  TrainConfig cfg;  // batch 8
  cfg.model.input_dim = spec.dim;
  const auto r = TrainRun(cfg, ds);
  const double best = r.history.best_val_s_mtl;
  const double initial = r.history.initial_val.s_mtl;
  const bool pass = best >= 0.9 * oracle.s_mtl && best >= 2.0 * initial;
  return {pass, "best val S_MTL " + Fmt("%.4f", best) + " at epoch " +
                    std::to_string(r.history.best_epoch) + "; oracle " +
                    Fmt("%.4f", oracle.s_mtl) + " (need >= " + Fmt("%.4f", 0.9 * oracle.s_mtl) +
                    "); untrained " + Fmt("%.4f", initial) + " (need >= " +
                    Fmt("%.4f", 2.0 * initial) + ")"};
}

// ---------------------------------------------------------------- 5

std::vector<std::string> Lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::vector<std::string> Cells(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  std::getline(ss, cell, '|');
  while (std::getline(ss, cell, '|')) {
    const auto b = cell.find_first_not_of(' ');
    const auto e = cell.find_last_not_of(' ');
    out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  return out;
}

// Checks the markdown layout of a mean_std sweep table and its S_MTL
// aggregation. Returns an empty string when the table is well formed.
std::string CheckTable(const SweepResult& result, const std::string& first_column,
                       const std::vector<std::string>& labels, std::size_t runs) {
  const auto lines = Lines(RenderMarkdown(result.table));
  if (lines.size() != labels.size() + 2) return "unexpected line count";
  if (lines[0] != "| " + first_column + " | CCC | UAR | 1/MAE | S_MTL |") return "bad header";
  const std::regex stat(R"(\d\.\d{3} ± \d\.\d{3})");
  const std::regex bold(R"(\*\*\d\.\d{3} ± \d\.\d{3}\*\*)");
  std::size_t bold_rows = 0, bold_at = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto cells = Cells(lines[i + 2]);
    if (cells.size() != 5 || cells[0] != labels[i]) return "bad row " + labels[i];
    for (std::size_t c = 1; c < 4; ++c)
      if (!std::regex_match(cells[c], stat)) return "bad cell '" + cells[c] + "'";
    if (std::regex_match(cells[4], bold)) {
      ++bold_rows;
      bold_at = i;
    } else if (!std::regex_match(cells[4], stat)) {
      return "bad S_MTL cell '" + cells[4] + "'";
    }
  }
  if (bold_rows != 1) return "expected one marked row, found " + std::to_string(bold_rows);
  const auto& rows = result.table.rows;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].runs_ok != runs) return "row " + labels[i] + " has failed runs";
    if (rows[i].s_mtl.mean > rows[bold_at].s_mtl.mean) return "marked row is not the maximum";
    double sum = 0.0;
    for (const auto& run : result.runs)
      if (run.cell_index == i) sum += run.metrics.s_mtl;
    if (std::abs(rows[i].s_mtl.mean - sum / static_cast<double>(runs)) > 1e-12)
      return "S_MTL is not the mean of run scores in row " + labels[i];
  }
  return {};
}

Verdict SweepStructure(const std::optional<fs::path>& out) {
  SweepSpec seeds;
  seeds.axis = SweepAxis::kSeed;
  seeds.values = {"42", "101", "102", "103", "104", "105", "106"};
  seeds.runs_per_cell = 5;
  seeds.data.feature_sets["synthetic"] = FeatureSetSource{SynthSpec{}, {}, {}, {}};
  seeds.data.default_feature_set = "synthetic";
  SweepSpec batches = seeds;
  batches.axis = SweepAxis::kBatchSize;
  batches.values = {"2", "4", "8", "16", "32"};

  const std::size_t workers = Workers();
  const auto seed_result = RunSweep(seeds, workers);
  const auto batch_result = RunSweep(batches, workers);
  if (out) {
    fs::create_directories(*out);
    EmitReport(seed_result.table, ReportFormat::kMarkdown, *out / "seed_sweep.md");
    EmitReport(batch_result.table, ReportFormat::kMarkdown, *out / "batch_sweep.md");
    EmitReport(seed_result.table, ReportFormat::kCsv, *out / "seed_sweep.csv");
    EmitReport(batch_result.table, ReportFormat::kCsv, *out / "batch_sweep.csv");
  }
  const auto e1 = CheckTable(seed_result, "Seed value", seeds.values, 5);
  const auto e2 = CheckTable(batch_result, "Batch size", batches.values, 5);
  auto best_label = [](const SweepResult& r) {
    for (const auto& row : r.table.rows)
      if (row.best) return row.label;
    return std::string("none");
  };
  std::string detail = "seed table 7 rows " + (e1.empty() ? std::string("ok") : e1) +
                       ", batch table 5 rows " + (e2.empty() ? std::string("ok") : e2) +
                       "; best seed " + best_label(seed_result) + ", best batch size " +
                       best_label(batch_result) + ", " + std::to_string(workers) + " worker(s)";
  return {e1.empty() && e2.empty(), detail};
}

// ---------------------------------------------------------------- 6

Verdict MetricProperties() {
  std::vector<std::string> failed;
  auto require = [&failed](bool ok, const char* what) {
    if (!ok) failed.push_back(what);
  };
  RngStream rng(6);
  auto series = [&rng](std::size_t n) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.Normal();
    return v;
  };
  bool bounded = true, symmetric = true;
  for (int t = 0; t < 200; ++t) {
    const auto x = series(25), y = series(25);
    const double c = Ccc(x, y).value;
    bounded = bounded && c >= -1.0 && c <= 1.0;
    symmetric = symmetric && c == Ccc(y, x).value;
  }
  require(bounded, "ccc bounds");
  require(symmetric, "ccc symmetry");
  const auto x = series(30);
  require(std::abs(Ccc(x, x).value - 1.0) < 1e-15, "ccc(x,x)=1");
  const std::vector<double> up{1, 2, 3}, down{3, 2, 1};
  require(std::abs(Ccc(up, down).value + 1.0) < 1e-15, "ccc reversed = -1");

  std::vector<int> truth, pred;
  for (int i = 0; i < 80; ++i) {
    truth.push_back(i % 4);
    pred.push_back(static_cast<int>(rng.UniformInt(4)));
  }
  const double base = Uar(pred, truth);
  bool dup_ok = true;
  for (int c = 0; c < 4; ++c) {
    auto t2 = truth, p2 = pred;
    for (std::size_t i = 0; i < truth.size(); ++i)
      if (truth[i] == c) {
        t2.push_back(truth[i]);
        p2.push_back(pred[i]);
      }
    dup_ok = dup_ok && Uar(p2, t2) == base;
  }
  require(dup_ok, "uar duplication invariance");
  require(Uar(std::vector<int>(80, 1), truth) == 0.25, "uar constant predictor 0.25");

  bool hm_ok = true;
  for (int t = 0; t < 500; ++t) {
    const double a = rng.Uniform(0.01, 1), b = rng.Uniform(0.01, 1), c = rng.Uniform(0.01, 1);
    const double s = SMtl(a, b, c).value;
    hm_ok = hm_ok && std::min({a, b, c}) <= s + 1e-15 && s <= std::max({a, b, c}) + 1e-15;
  }
  require(hm_ok, "harmonic mean bounds");
  require(std::abs(SMtl(0.37, 0.37, 0.37).value - 0.37) < 1e-15, "harmonic fixed point");

  const LossConfig cfg;
  require(std::abs(TotalLoss(0, 0, 0, cfg) - 0.5) < 1e-15, "zero-loss constant 0.5");
  const double l0 = TotalLoss(0.4, 0.5, 0.6, cfg);
  require(TotalLoss(0.41, 0.5, 0.6, cfg) > l0 && TotalLoss(0.4, 0.51, 0.6, cfg) > l0 &&
              TotalLoss(0.4, 0.5, 0.61, cfg) > l0,
          "total loss monotonicity");

  std::string detail = failed.empty() ? "12 properties hold" : "violated:";
  for (const auto& f : failed) detail += " " + f + ";";
  return {failed.empty(), detail};
}

// ---------------------------------------------------------------- 7

std::vector<double> SharedFlat(const ModelParams& g) {
  std::vector<double> out;
  for (const auto& layer : g.shared)
    for (const Matrix* m : {&layer.weight, &layer.bias, &layer.gamma, &layer.beta})
      out.insert(out.end(), m->values().begin(), m->values().end());
  return out;
}

Verdict LossWeighting() {
  SynthSpec spec;
  spec.n_train = 64;
  spec.n_val = 16;
  const auto ds = SynthDataset(spec);
  ModelConfig mc;
  mc.input_dim = spec.dim;
  RngStream rng(7);
  const auto params = InitParams(mc, rng);
  std::vector<std::size_t> rows(16);
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  const Matrix x = ds.train.features.GatherRows(rows);
  const auto targets = ds.train.Targets(rows, ds.age_scaler);
  const auto [out, cache] = Forward(params, mc, x);
  const std::size_t n = rows.size();

  const LossConfig cfg;  // 0.34, 0.33, 0.33
  const double alphas[3] = {cfg.alpha_emotion, cfg.alpha_country, cfg.alpha_age};
  const char* names[3] = {"emotion", "country", "age"};
  bool pass = true;
  std::string detail;
  for (int task = 0; task < 3; ++task) {
    // Unweighted task gradient pushed through the network alone.
    OutputGrads raw{Matrix(n, 10), Matrix(n, 1), Matrix(n, 4)};
    if (task == 0) raw.emotion = MseLoss(out.emotion, targets.emotion).grad;
    if (task == 1) raw.country_logits = CrossEntropyLoss(out.country_logits, targets.country).grad;
    if (task == 2) raw.age_scaled = MseLoss(out.age_scaled, targets.age_scaled).grad;
    const auto r = SharedFlat(Backward(params, mc, cache, raw));

    // Task contribution inside the combined gradient: full minus task-off.
    LossConfig off = cfg;
    (task == 0 ? off.alpha_emotion : task == 1 ? off.alpha_country : off.alpha_age) = 1000.0;
    const auto full = SharedFlat(ComputeBatchGradients(params, mc, cfg, x, targets).grads);
    const auto without = SharedFlat(ComputeBatchGradients(params, mc, off, x, targets).grads);

    double rr = 0.0, cr = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      const double c = full[i] - without[i];
      rr += r[i] * r[i];
      cr += c * r[i];
      scale = std::max(scale, std::abs(r[i]));
    }
    const double ratio = cr / rr;
    const double expected = 1.0 / (2.0 * std::exp(alphas[task]));
    double worst = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i)
      worst = std::max(worst, std::abs((full[i] - without[i]) - expected * r[i]));
    const double rel = std::abs(ratio - expected) / expected;
    const bool ok = rel <= 1e-10 && worst <= 1e-10 * expected * scale;
    pass = pass && ok;
    detail += std::string(task ? "; " : "") + names[task] + " ratio " + Fmt("%.12f", ratio) +
              " vs " + Fmt("%.12f", expected) + " (rel " + Fmt("%.1e", rel) + ")";
  }
  return {pass, detail};
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<Verdict()> run;
};

}  // namespace
}  // namespace vbmtl

int main(int argc, char** argv) {
  using namespace vbmtl;
  std::set<int> selected;
  std::optional<fs::path> out;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--out" && i + 1 < argc) {
      out = argv[++i];
    } else {
      selected.insert(std::atoi(arg.c_str()));
    }
  }
  const std::vector<Criterion> criteria = {
      {1, "Published score consistency", 1.0, PublishedScoreConsistency},
      {2, "Gradient correctness", 10.0, GradientCorrectness},
      {3, "Determinism", 60.0, Determinism},
      {4, "End-to-end learnability", 120.0, Learnability},
      {5, "Sweep structure", 900.0, [&out] { return SweepStructure(out); }},
      {6, "Metric property suite", 5.0, MetricProperties},
      {7, "Loss-weighting contract", 5.0, LossWeighting},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.contains(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.budget_seconds;
    const bool pass = v.pass && in_time;
    if (!pass) ++failures;
    std::printf("[%s] %d. %s: %s [%.2f s, limit %.0f s%s]\n", pass ? "PASS" : "FAIL", c.id,
                c.name, v.detail.c_str(), secs, c.budget_seconds,
                in_time ? "" : ", over time");
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
