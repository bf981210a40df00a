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

#include "msfi/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "msfi/errors.hpp"
#include "msfi/stats.hpp"

namespace msfi {

namespace {

std::string fixed(double v, int digits = 3) {
  if (std::isnan(v)) return "NaN";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string p_value(double p) {
  if (std::isnan(p)) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof buf, p < 1e-3 ? "%.1e" : "%.3f", p);
  return buf;
}

std::vector<double> finite(const std::vector<double>& values) {
  std::vector<double> out;
  for (double v : values) {
    if (std::isfinite(v)) out.push_back(v);
  }
  return out;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? std::nan("") : s / static_cast<double>(v.size());
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s) {
  if (s == "nan" || s == "NaN") return std::nan("");
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw DataError("bad number '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    throw DataError("bad number '" + s + "'");
  }
}

}  // namespace

void write_diffauc_csv(const std::filesystem::path& path, const std::vector<DiffAucRow>& rows) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << "method,auc,random_auc,diff_auc,seeds\n";
  for (const auto& r : rows) {
    out << r.method << ',' << format_number(r.auc) << ',' << format_number(r.random_auc) << ','
        << format_number(r.diff_auc) << ',' << r.seeds << '\n';
  }
}

std::vector<DiffAucRow> read_diffauc_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("missing diffAUC file: " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "method,auc,random_auc,diff_auc,seeds") {
    throw DataError("unexpected diffAUC header in " + path.string());
  }
  std::vector<DiffAucRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 5) throw DataError("malformed diffAUC row: " + line);
    rows.push_back({cells[0], parse_double(cells[1]), parse_double(cells[2]), parse_double(cells[3]),
                    static_cast<int>(parse_double(cells[4]))});
  }
  return rows;
}

std::string mean_std_cell(const std::vector<double>& values) {
  const auto v = finite(values);
  if (v.empty()) return "NaN";
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  const double sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
  std::string cell = fixed(m) + " ± " + fixed(sd);
  if (v.size() < values.size()) cell += " (" + std::to_string(values.size() - v.size()) + " NaN)";
  return cell;
}

std::string render_report(const std::vector<MetricRecord>& rows,
                          const std::vector<DiffAucRow>& diffauc, const ReportOptions& options) {
  if (rows.empty()) throw DataError("no metric rows to report");

  std::map<std::string, std::vector<const MetricRecord*>> by_method;
  std::set<std::string> cases;
  for (const auto& r : rows) {
    by_method[r.method].push_back(&r);
    cases.insert(r.case_id);
  }
  std::map<std::string, const DiffAucRow*> diff;
  for (const auto& d : diffauc) diff[d.method] = &d;

  std::ostringstream out;
  out << "# MSFI evaluation report\n\n";
  out << "Cases: " << cases.size() << ", methods: " << by_method.size() << "\n\n";

  out << "| Method | Rows | MSFI | MI corr | diffAUC | FP | IoU | Speed (s) |";
  if (options.by_correctness) out << " MSFI correct | MSFI incorrect | p | Sig. |";
  out << "\n|---|---|---|---|---|---|---|---|";
  if (options.by_correctness) out << "---|---|---|---|";
  out << '\n';

  for (const auto& [method, recs] : by_method) {
    std::vector<double> msfi_v, mi, fp, iou_v, secs, correct, incorrect;
    std::size_t usable = 0;
    for (const auto* r : recs) {
      if (r->status == RecordStatus::kMissing || r->status == RecordStatus::kError) continue;
      ++usable;
      msfi_v.push_back(r->msfi);
      mi.push_back(r->mi_correlation);
      fp.push_back(r->fp);
      iou_v.push_back(r->iou);
      secs.push_back(r->seconds);
      if (auto ok = r->correct(); ok && std::isfinite(r->msfi)) (*ok ? correct : incorrect).push_back(r->msfi);
    }
    out << "| " << method << " | " << usable << '/' << recs.size() << " | " << mean_std_cell(msfi_v)
        << " | " << mean_std_cell(mi) << " | "
        << (diff.count(method) ? fixed(diff[method]->diff_auc) : std::string("–")) << " | "
        << mean_std_cell(fp) << " | " << mean_std_cell(iou_v) << " | " << fixed(mean(secs), 4)
        << " |";
    if (options.by_correctness) {
      auto group = [](const std::vector<double>& g) {
        return g.empty() ? std::string("–") : fixed(mean(g)) + " (n=" + std::to_string(g.size()) + ")";
      };
      double p = std::nan("");
      if (!correct.empty() && !incorrect.empty()) p = stats::mann_whitney_u(correct, incorrect).p;
      out << ' ' << group(correct) << " | " << group(incorrect) << " | " << p_value(p) << " | "
          << stats::significance_stars(p) << " |";
    }
    out << '\n';
  }
  out << "\nNaN metric values are excluded from means and counted in parentheses. "
         "Sig.: *** p<0.001, ** p<0.01, * p<0.05, NS otherwise (two-sided Mann-Whitney U).\n";

  // Friedman over cases that have a finite MSFI for every method.
  out << "\n## Method ranking (MSFI)\n\n";
  std::vector<std::string> methods;
  for (const auto& [m, recs] : by_method) methods.push_back(m);
  std::map<std::string, std::map<std::string, double>> table;  // case -> method -> msfi
  for (const auto& r : rows) {
    if (r.status != RecordStatus::kMissing && r.status != RecordStatus::kError && std::isfinite(r.msfi)) {
      table[r.case_id][r.method] = r.msfi;
    }
  }
  std::vector<std::vector<double>> scores;
  for (const auto& [case_id, per_method] : table) {
    if (per_method.size() != methods.size()) continue;
    std::vector<double> row;
    for (const auto& m : methods) row.push_back(per_method.at(m));
    scores.push_back(std::move(row));
  }
  if (methods.size() >= 2 && scores.size() >= 2) {
    const auto f = stats::friedman(scores);
    out << "Friedman chi2 = " << fixed(f.chi2) << ", p = " << p_value(f.p) << " (n = " << scores.size()
        << ", k = " << methods.size() << ")\n\n";
    out << "| Method | Mean rank |\n|---|---|\n";
    for (std::size_t j = 0; j < methods.size(); ++j) {
      out << "| " << methods[j] << " | " << fixed(f.mean_ranks[j]) << " |\n";
    }
    if (methods.size() <= 20) {
      out << "\nNemenyi critical difference (alpha = " << fixed(options.alpha, 2)
          << "): " << fixed(stats::nemenyi_cd(methods.size(), scores.size(), options.alpha)) << '\n';
    }
  } else {
    out << "Not enough complete cases or methods for a Friedman test.\n";
  }

  out << "\n## Correlation with non-modality-specific metrics\n\n";
  std::vector<double> ms, fps, ious;
  std::vector<double> ms_i, ious_i;
  for (const auto& r : rows) {
    if (r.status != RecordStatus::kOk) continue;
    if (std::isfinite(r.msfi) && std::isfinite(r.fp)) {
      ms.push_back(r.msfi);
      fps.push_back(r.fp);
    }
    if (std::isfinite(r.msfi) && std::isfinite(r.iou)) {
      ms_i.push_back(r.msfi);
      ious_i.push_back(r.iou);
    }
  }
  auto corr = [](const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() < 2) return std::string("undefined");
    try {
      return fixed(stats::pearson(a, b));
    } catch (const UndefinedError&) {
      return std::string("undefined");
    }
  };
  out << "Pearson r(MSFI, FP) = " << corr(ms, fps) << " (n = " << ms.size() << ")\n";
  out << "Pearson r(MSFI, IoU) = " << corr(ms_i, ious_i) << " (n = " << ms_i.size() << ")\n";
  return out.str();
}

}  // namespace msfi
