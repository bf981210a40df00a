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

#include "msfi/ablation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "msfi/metrics.hpp"
#include "msfi/random.hpp"

namespace msfi {

namespace {
constexpr std::uint64_t kAblationStream = 0x61626c617465;  // "ablate"
}

std::string Ordering::label() const {
  return kind == Kind::kHeatmapDescending ? "heatmap" : "random:" + std::to_string(seed);
}

std::vector<double> fraction_grid(double step) {
  if (!(step > 0.0 && step <= 0.5)) throw UsageError("ablation step must lie in (0, 0.5]");
  std::vector<double> grid;
  for (std::size_t i = 0;; ++i) {
    const double f = static_cast<double>(i) * step;
    if (f >= 1.0 - 1e-9) break;
    grid.push_back(f);
  }
  grid.push_back(1.0);
  return grid;
}

std::vector<std::size_t> heatmap_order(const Heatmap& heatmap) {
  const auto values = heatmap.values.values();
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  return order;
}

Image ablate_top(const Image& image, const std::vector<std::size_t>& order, double fraction) {
  Image out = image;
  const auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(order.size())));
  for (std::size_t i = 0; i < std::min(k, order.size()); ++i) out[order[i]] = 0.0f;
  return out;
}

AblationCurve ablation_curve(Oracle& oracle, const DatasetManifest& dataset,
                             const std::vector<Heatmap>& heatmaps, Ordering ordering,
                             double step) {
  const auto grid = fraction_grid(step);
  const std::size_t n = dataset.cases.size();
  if (n == 0) throw DataError("cannot ablate an empty dataset");

  std::vector<std::vector<std::size_t>> orders(n);
  if (ordering.kind == Ordering::Kind::kHeatmapDescending) {
    if (heatmaps.size() != n) {
      throw DataError("ablation needs one heatmap per case (" + std::to_string(heatmaps.size()) +
                      " for " + std::to_string(n) + " cases)");
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (heatmaps[i].values.shape() != dataset.cases[i].image.shape()) {
        throw DataError("case '" + dataset.cases[i].id + "': heatmap shape " +
                        shape_to_string(heatmaps[i].values.shape()) + " does not match image");
      }
    }
    parallel_for(n, [&](std::size_t i) { orders[i] = heatmap_order(heatmaps[i]); });
  } else {
    parallel_for(n, [&](std::size_t i) {
      Rng rng(derive_seed(ordering.seed, kAblationStream, i));
      orders[i] = rng.permutation(dataset.cases[i].image.size());
    });
  }

  // One flat job list over (fraction, case) keeps batches full.
  const auto predicted = predict_classes(oracle, grid.size() * n, [&](std::size_t j) {
    const std::size_t point = j / n, i = j % n;
    return ablate_top(dataset.cases[i].image, orders[i], grid[point]);
  });

  AblationCurve curve{grid, std::vector<double>(grid.size(), 0.0), ordering};
  for (std::size_t point = 0; point < grid.size(); ++point) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) hits += predicted[point * n + i] == dataset.cases[i].label;
    curve.accuracies[point] = static_cast<double>(hits) / static_cast<double>(n);
  }
  return curve;
}

double auc(const AblationCurve& curve) {
  const auto& f = curve.fractions;
  const auto& a = curve.accuracies;
  if (f.size() < 2 || f.size() != a.size()) throw DataError("ablation curve needs >= 2 points");
  double area = 0.0;
  for (std::size_t i = 1; i < f.size(); ++i) area += 0.5 * (a[i] + a[i - 1]) * (f[i] - f[i - 1]);
  return area / (f.back() - f.front());
}

double diff_auc(const AblationCurve& method, const std::vector<AblationCurve>& random) {
  if (random.empty()) throw DataError("diffAUC needs at least one random baseline curve");
  double sum = 0.0;
  for (const auto& r : random) {
    if (r.fractions != method.fractions) throw DataError("ablation curves use different fraction grids");
    sum += auc(r);
  }
  return sum / static_cast<double>(random.size()) - auc(method);
}

void write_curves_csv(const std::filesystem::path& path, const std::vector<NamedCurve>& curves) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << "method,ordering,fraction,accuracy\n";
  for (const auto& [method, curve] : curves) {
    for (std::size_t i = 0; i < curve.fractions.size(); ++i) {
      out << method << ',' << curve.ordering.label() << ',' << format_number(curve.fractions[i])
          << ',' << format_number(curve.accuracies[i]) << '\n';
    }
  }
}

}  // namespace msfi
