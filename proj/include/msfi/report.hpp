/*
 * Copyright 2026 The msfi-eval Authors.
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

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "msfi/metrics.hpp"

namespace msfi {

struct DiffAucRow {
  std::string method;
  double auc = 0.0;
  double random_auc = 0.0;
  double diff_auc = 0.0;
  int seeds = 0;
};

void write_diffauc_csv(const std::filesystem::path& path, const std::vector<DiffAucRow>& rows);
std::vector<DiffAucRow> read_diffauc_csv(const std::filesystem::path& path);

/// "mean ± std" over finite values; "NaN" when none are finite, with the
/// number of NaN values appended when only some are.
std::string mean_std_cell(const std::vector<double>& values);

struct ReportOptions {
  bool by_correctness = true;  // Mann-Whitney on MSFI, correct vs incorrect
  double alpha = 0.05;         // Nemenyi level
};

/// Markdown report: per-method table, Friedman/Nemenyi on per-case MSFI and
/// Pearson correlations of MSFI with FP and IoU. Output is a pure function
/// of the rows (methods and cases sorted by name).
std::string render_report(const std::vector<MetricRecord>& rows,
                          const std::vector<DiffAucRow>& diffauc, const ReportOptions& options);

}  // namespace msfi
