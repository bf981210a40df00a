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

#include "msfi/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "msfi/kernels.hpp"
#include "msfi/stats.hpp"

namespace msfi {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_non_negative(const Heatmap& heatmap, const char* what) {
  for (double v : heatmap.values.values()) {
    if (v < 0.0) throw DataError(std::string(what) + " requires a rectified (non-negative) heatmap");
  }
}

double weight_sum(const MiVector& phi, std::size_t modalities) {
  if (phi.values.size() != modalities) {
    throw DataError("MI vector has " + std::to_string(phi.values.size()) +
                    " entries for a heatmap with " + std::to_string(modalities) + " modalities");
  }
  double sum = 0.0;
  for (double w : phi.values) {
    if (!(w >= 0.0)) throw DataError("MI weights must be non-negative");
    sum += w;
  }
  if (!(sum > 0.0)) throw UndefinedError("MSFI undefined: MI weights sum to zero");
  return sum;
}

}  // namespace

MiVector estimated_mi(const Heatmap& heatmap) {
  return MiVector{kernels::positive_sums(heatmap.values), false};
}

double mi_correlation(const MiVector& estimated, const MiVector& truth) {
  if (estimated.values.size() != truth.values.size()) {
    throw DataError("MI vectors differ in length");
  }
  return stats::kendall_tau_b(estimated.values, truth.values);
}

double msfi_unnormalized(const Heatmap& heatmap, const MaskSet& masks, const MiVector& phi) {
  require_non_negative(heatmap, "MSFI");
  weight_sum(phi, heatmap.values.modalities());
  const auto sums = kernels::masked_sums(heatmap.values, masks);
  double hat = 0.0;
  for (std::size_t m = 0; m < sums.total.size(); ++m) {
    const double ratio = sums.total[m] > 0.0 ? sums.inside[m] / sums.total[m] : 0.0;
    hat += phi.values[m] * ratio;
  }
  return hat;
}

double msfi(const Heatmap& heatmap, const MaskSet& masks, const MiVector& phi) {
  const double hat = msfi_unnormalized(heatmap, masks, phi);
  return hat / weight_sum(phi, heatmap.values.modalities());
}

std::optional<double> feature_portion(const Heatmap& heatmap, const MaskSet& masks) {
  require_non_negative(heatmap, "feature portion");
  const auto sums = kernels::masked_sums(heatmap.values, masks);
  double inside = 0.0, total = 0.0;
  for (std::size_t m = 0; m < sums.total.size(); ++m) {
    inside += sums.inside[m];
    total += sums.total[m];
  }
  if (!(total > 0.0)) return std::nullopt;
  return inside / total;
}

double iou(const Heatmap& heatmap, const MaskSet& masks, double threshold_fraction) {
  if (heatmap.values.shape() != masks.shape()) {
    throw DataError("shape mismatch: heatmap " + shape_to_string(heatmap.values.shape()) +
                    " vs masks " + shape_to_string(masks.shape()));
  }
  const double peak = kernels::max_value(heatmap.values);
  const double cut = threshold_fraction * peak;
  std::size_t inter = 0, uni = 0;
  const auto v = heatmap.values.values();
  const auto l = masks.values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    const bool hot = peak > 0.0 && v[i] > 0.0 && v[i] >= cut;
    const bool in = l[i] > 0;
    inter += hot && in;
    uni += hot || in;
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

std::string to_string(RecordStatus status) {
  switch (status) {
    case RecordStatus::kOk: return "ok";
    case RecordStatus::kDegenerate: return "degenerate";
    case RecordStatus::kMissing: return "missing";
    case RecordStatus::kError: return "error";
  }
  return "error";
}

RecordStatus parse_record_status(const std::string& text) {
  if (text == "ok") return RecordStatus::kOk;
  if (text == "degenerate") return RecordStatus::kDegenerate;
  if (text == "missing") return RecordStatus::kMissing;
  if (text == "error") return RecordStatus::kError;
  throw DataError("unknown record status '" + text + "'");
}

const std::vector<std::string>& metric_csv_columns() {
  static const std::vector<std::string> kColumns = {
      "case_id", "method", "status", "label", "prediction", "correct",
      "msfi",    "mi_correlation", "fp", "iou", "seconds"};
  return kColumns;
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", value == 0.0 ? 0.0 : value);
  return buf;
}

void write_metric_csv(const std::filesystem::path& path, const std::vector<MetricRecord>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  const auto& cols = metric_csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const auto& r : rows) {
    const auto correct = r.correct();
    out << r.case_id << ',' << r.method << ',' << to_string(r.status) << ',' << r.label << ','
        << (r.prediction ? std::to_string(*r.prediction) : "") << ','
        << (correct ? (*correct ? "1" : "0") : "") << ',' << format_number(r.msfi) << ','
        << format_number(r.mi_correlation) << ',' << format_number(r.fp) << ','
        << format_number(r.iou) << ',' << format_number(r.seconds) << '\n';
  }
}

namespace {

double parse_number(const std::string& text) {
  if (text.empty() || text == "nan") return kNaN;
  std::size_t pos = 0;
  double v = std::stod(text, &pos);
  if (pos != text.size()) throw std::invalid_argument(text);
  return v;
}

}  // namespace

std::vector<MetricRecord> read_metric_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("missing metrics CSV: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty metrics CSV: " + path.string());
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header != metric_csv_columns()) throw DataError("unexpected metrics CSV header in " + path.string());

  std::vector<MetricRecord> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (cells.size() != header.size()) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " columns");
    }
    try {
      MetricRecord r;
      r.case_id = cells[0];
      r.method = cells[1];
      r.status = parse_record_status(cells[2]);
      r.label = std::stoi(cells[3]);
      if (!cells[4].empty()) r.prediction = std::stoi(cells[4]);
      r.msfi = parse_number(cells[6]);
      r.mi_correlation = parse_number(cells[7]);
      r.fp = parse_number(cells[8]);
      r.iou = parse_number(cells[9]);
      r.seconds = parse_number(cells[10]);
      rows.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": malformed row");
    }
  }
  return rows;
}

}  // namespace msfi
