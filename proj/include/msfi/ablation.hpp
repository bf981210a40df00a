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

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "msfi/manifest.hpp"
#include "msfi/oracle.hpp"

namespace msfi {

struct Ordering {
  enum class Kind { kHeatmapDescending, kRandom } kind = Kind::kHeatmapDescending;
  std::uint64_t seed = 0;

  static Ordering heatmap() { return {}; }
  static Ordering random(std::uint64_t seed) { return {Kind::kRandom, seed}; }
  std::string label() const;
};

struct AblationCurve {
  std::vector<double> fractions;
  std::vector<double> accuracies;
  Ordering ordering;
};

inline constexpr double kDefaultAblationStep = 0.05;
inline constexpr int kDefaultBaselineSeeds = 5;

/// 0, step, 2*step, ..., 1 (1 is always the last point).
std::vector<double> fraction_grid(double step);

/// Voxel indices by descending value across all modalities; ties by index.
std::vector<std::size_t> heatmap_order(const Heatmap& heatmap);

/// Zeroes the top round(f * size) voxels of `order` in a copy of `image`.
Image ablate_top(const Image& image, const std::vector<std::size_t>& order, double fraction);

/*
 * Accuracy as the top fraction of voxels is removed. With a heatmap
 * ordering `heatmaps` holds one rectified heatmap per dataset case; with a
 * random ordering it is ignored and each case gets an independent
 * permutation derived from (seed, case index).
 */
AblationCurve ablation_curve(Oracle& oracle, const DatasetManifest& dataset,
                             const std::vector<Heatmap>& heatmaps, Ordering ordering,
                             double step = kDefaultAblationStep);

double auc(const AblationCurve& curve);

/// mean(auc(random)) - auc(method); positive when the method beats chance.
double diff_auc(const AblationCurve& method, const std::vector<AblationCurve>& random);

struct NamedCurve {
  std::string method;
  AblationCurve curve;
};

/// Long format: method, ordering, fraction, accuracy.
void write_curves_csv(const std::filesystem::path& path, const std::vector<NamedCurve>& curves);

}  // namespace msfi
