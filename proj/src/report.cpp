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

#include "vbmtl/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace vbmtl {

namespace {

std::string Fixed3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  // "-0.000" would make byte output depend on the sign of a rounded zero.
  if (std::string(buf) == "-0.000") return "0.000";
  return buf;
}

const char* FirstColumn(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kSeed: return "Seed value";
    case SweepAxis::kBatchSize: return "Batch size";
    case SweepAxis::kFeatureSet: return "Feature";
    case SweepAxis::kStandardization: return "Standardization";
  }
  return "Cell";
}

}  // namespace

ReportFormat ParseReportFormat(const std::string& s) {
  if (s == "markdown" || s == "md") return ReportFormat::kMarkdown;
  if (s == "csv") return ReportFormat::kCsv;
  throw ConfigError("unknown report format '" + s + "'");
}

std::string RenderMarkdown(const ReportTable& table) {
  const bool with_std = table.aggregation == Aggregation::kMeanStd;
  const bool with_run = table.aggregation == Aggregation::kBest;
  std::ostringstream os;
  os << "| " << FirstColumn(table.axis) << " | CCC | UAR | 1/MAE | S_MTL |";
  if (with_run) os << " Selected run |";
  os << "\n|---|---|---|---|---|";
  if (with_run) os << "---|";
  os << '\n';
  for (const auto& row : table.rows) {
    auto cell = [with_std](const Stat& s) {
      return with_std ? Fixed3(s.mean) + " ± " + Fixed3(s.std) : Fixed3(s.mean);
    };
    os << "| " << row.label << " | ";
    if (row.runs_ok == 0) {
      os << "failed | failed | failed | failed |";
      if (with_run) os << " n/a |";
      os << '\n';
      continue;
    }
    std::string s_mtl = cell(row.s_mtl);
    if (row.best) s_mtl = "**" + s_mtl + "**";
    os << cell(row.ccc) << " | " << cell(row.uar) << " | " << cell(row.inv_mae) << " | "
       << s_mtl << " |";
    if (with_run) os << " " << *row.selected_run << " |";
    os << '\n';
  }
  if (!table.failures.empty()) {
    os << "\nFailed runs:\n";
    for (const auto& f : table.failures)
      os << "- " << f.cell << " run " << f.run_index << ": " << f.error << '\n';
  }
  return os.str();
}

std::string RenderCsv(const ReportTable& table) {
  const bool with_std = table.aggregation == Aggregation::kMeanStd;
  std::ostringstream os;
  os << "label,ccc,ccc_std,uar,uar_std,inv_mae,inv_mae_std,s_mtl,s_mtl_std,best,"
        "selected_run,runs_ok,runs_failed\n";
  for (const auto& row : table.rows) {
    os << row.label;
    for (const Stat* s : {&row.ccc, &row.uar, &row.inv_mae, &row.s_mtl}) {
      if (row.runs_ok == 0) {
        os << ",,";
        continue;
      }
      os << ',' << Fixed3(s->mean) << ',' << (with_std ? Fixed3(s->std) : "");
    }
    os << ',' << (row.best ? 1 : 0) << ',';
    if (row.selected_run) os << *row.selected_run;
    os << ',' << row.runs_ok << ',' << row.runs_failed << '\n';
  }
  return os.str();
}

std::string Render(const ReportTable& table, ReportFormat format) {
  return format == ReportFormat::kMarkdown ? RenderMarkdown(table) : RenderCsv(table);
}

std::string RenderRunsCsv(const std::vector<RunOutcome>& runs) {
  std::ostringstream os;
  os << "label,run_index,run_seed,ccc,uar,mae_years,inv_mae,s_mtl,best_epoch,epochs_run,"
        "status\n";
  for (const auto& r : runs) {
    os << r.cell << ',' << r.run_index << ',' << r.run_seed << ',';
    if (r.ok) {
      os << FormatDouble(r.metrics.mean_ccc) << ',' << FormatDouble(r.metrics.uar) << ','
         << FormatDouble(r.metrics.mae_years) << ',' << FormatDouble(r.metrics.inv_mae)
         << ',' << FormatDouble(r.metrics.s_mtl) << ',' << r.best_epoch << ','
         << r.epochs_run << ",ok\n";
    } else {
      os << ",,,,,,,failed\n";
    }
  }
  return os.str();
}

void EmitReport(const ReportTable& table, ReportFormat format,
                const std::filesystem::path& path) {
  if (table.rows.empty()) throw DataError("refusing to emit an empty report");
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << Render(table, format);
}

}  // namespace vbmtl
