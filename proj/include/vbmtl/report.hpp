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

#ifndef VBMTL_REPORT_HPP_
#define VBMTL_REPORT_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "vbmtl/harness.hpp"

namespace vbmtl {

enum class ReportFormat { kMarkdown, kCsv };
ReportFormat ParseReportFormat(const std::string& s);

// Tables round every score to 3 decimals. Markdown shows "mean ± std" cells
// only under mean_std aggregation and bolds the best row's S_MTL. Failed
// runs are listed below the markdown table.
std::string RenderMarkdown(const ReportTable& table);
// Columns: label,ccc,ccc_std,uar,uar_std,inv_mae,inv_mae_std,s_mtl,s_mtl_std,
// best,selected_run,runs_ok,runs_failed. Std columns are empty under best.
std::string RenderCsv(const ReportTable& table);
std::string Render(const ReportTable& table, ReportFormat format);

// Full-precision per-run sidecar.
std::string RenderRunsCsv(const std::vector<RunOutcome>& runs);

// Throws DataError on an empty table.
void EmitReport(const ReportTable& table, ReportFormat format,
                const std::filesystem::path& path);

}  // namespace vbmtl

#endif  // VBMTL_REPORT_HPP_
