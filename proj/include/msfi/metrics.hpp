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
#include <optional>
#include <string>
#include <vector>

#include "msfi/tensor.hpp"

namespace msfi {

/// Per-modality importance values, ground truth or estimated from a heatmap.
struct MiVector {
  std::vector<double> values;
  bool normalized = false;
};

/// Sum of the positive part of each modality slice.
MiVector estimated_mi(const Heatmap& heatmap);

/// Kendall tau-b between two MI vectors; NaN when either is entirely tied.
double mi_correlation(const MiVector& estimated, const MiVector& truth);

/*
 * Modality-specific feature importance.
 *
 * For each modality m the fraction of heatmap mass inside the localization
 * mask L_m is weighted by phi_m; the weighted sum is divided by sum(phi):
 *
 *   MSFI = sum_m phi_m * inside_m / total_m  /  sum_m phi_m
 *
 * A modality whose heatmap slice sums to zero contributes a ratio of 0, so
 * an explainer that ignores an important modality is penalized.
 *
 * Requires a non-negative heatmap and non-negative phi with positive sum
 * (UndefinedError otherwise). Result lies in [0, 1].
 */
double msfi(const Heatmap& heatmap, const MaskSet& masks, const MiVector& phi);

/// The unnormalized weighted sum (MSFI before division by sum(phi)).
double msfi_unnormalized(const Heatmap& heatmap, const MaskSet& masks, const MiVector& phi);

/// Fraction of total heatmap mass inside the masks, all modalities jointly.
/// nullopt for an all-zero heatmap.
std::optional<double> feature_portion(const Heatmap& heatmap, const MaskSet& masks);

/// IoU between the heatmap binarized at threshold_fraction * max and the
/// masks. An all-zero heatmap binarizes to the empty set; an empty union
/// scores 0.
double iou(const Heatmap& heatmap, const MaskSet& masks, double threshold_fraction = 0.5);

enum class RecordStatus { kOk, kDegenerate, kMissing, kError };

std::string to_string(RecordStatus status);
RecordStatus parse_record_status(const std::string& text);

/// One row of the evaluation table. Undefined values are NaN.
struct MetricRecord {
  std::string case_id;
  std::string method;
  RecordStatus status = RecordStatus::kOk;
  int label = 0;
  std::optional<int> prediction;
  double msfi = 0.0;
  double mi_correlation = 0.0;
  double fp = 0.0;
  double iou = 0.0;
  double seconds = 0.0;

  std::optional<bool> correct() const {
    if (!prediction) return std::nullopt;
    return *prediction == label;
  }
};

/// Column order of the metrics CSV.
const std::vector<std::string>& metric_csv_columns();

std::string format_number(double value);
void write_metric_csv(const std::filesystem::path& path, const std::vector<MetricRecord>& rows);
std::vector<MetricRecord> read_metric_csv(const std::filesystem::path& path);

}  // namespace msfi
