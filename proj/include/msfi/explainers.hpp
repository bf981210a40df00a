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

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "json.hpp"
#include "msfi/manifest.hpp"
#include "msfi/oracle.hpp"

namespace msfi {

/// Partition of voxels into players; groups never span modalities.
struct FeatureGrouping {
  Shape shape;
  std::vector<std::uint32_t> group;  // one id per voxel, ids contiguous from 0
  std::size_t count = 0;
  std::string description;

  /// Voxel indices of each group, ascending.
  std::vector<std::vector<std::size_t>> members() const;
};

/// Axis-aligned patches of `patch` voxels per spatial axis, per modality.
FeatureGrouping segment_grid(const Shape& image_shape, std::size_t patch);

/// Per modality: one group for voxels inside the mask, one for the rest
/// (empty parts are skipped).
FeatureGrouping segment_masks(const MaskSet& masks);

struct ExplainerConfig {
  std::string method;
  double baseline = 0.0;
  int samples = 0;            // 0 = method default
  std::size_t window = 8;     // occlusion window edge
  std::size_t stride = 4;     // occlusion stride
  std::size_t patch = 8;      // grid grouping patch edge
  std::string grouping = "grid";  // grid | mask
  double sigma = 0.75;        // lime kernel width; +inf = unweighted
  double lambda = 0.0;        // ridge strength (intercept unpenalized)
  std::uint64_t seed = 0;
};

nlohmann::json to_json(const ExplainerConfig& config);

/// Method names accepted by explain(); reference baselines included.
const std::vector<std::string>& explainer_names();
bool is_explainer(const std::string& name);

struct ScoreTarget {
  int predicted_class = 0;
  double score = 0.0;  // probability of predicted_class on the original input
};

ScoreTarget score_target(Oracle& oracle, const Image& input);

Heatmap occlusion(Oracle& oracle, const Image& input, std::size_t window, std::size_t stride,
                  double baseline);

Heatmap feature_ablation(Oracle& oracle, const Image& input, const FeatureGrouping& grouping,
                         double baseline);

/// Antithetic permutation pairs: sample 2k+1 is the reverse of sample 2k.
Heatmap shapley_value_sampling(Oracle& oracle, const Image& input, const FeatureGrouping& grouping,
                               int samples, double baseline, std::uint64_t seed);

/// Coalitions are enumerated when samples >= 2^G - 2, sampled otherwise.
Heatmap kernel_shap(Oracle& oracle, const Image& input, const FeatureGrouping& grouping,
                    int samples, double baseline, double lambda, std::uint64_t seed);

Heatmap lime(Oracle& oracle, const Image& input, const FeatureGrouping& grouping, int samples,
             double sigma, double lambda, double baseline, std::uint64_t seed);

/// Permutation of batch positions used by feature_permutation for `seed`.
std::vector<std::size_t> batch_permutation(std::size_t batch, std::uint64_t seed);

std::vector<Heatmap> feature_permutation(Oracle& oracle, const std::vector<Image>& inputs,
                                         const FeatureGrouping& grouping,
                                         const std::vector<std::size_t>& permutation);
std::vector<Heatmap> feature_permutation(Oracle& oracle, const std::vector<Image>& inputs,
                                         const FeatureGrouping& grouping, std::uint64_t seed);

/// Reference heatmaps: "uniform" (all ones) and "random" (U[0,1) from seed).
Heatmap reference_heatmap(const std::string& kind, const Shape& shape, std::uint64_t seed);

FeatureGrouping make_grouping(const ExplainerConfig& config, const Case& c);

/// Dispatches one case through the named method (not feature_permutation).
Heatmap explain(Oracle& oracle, const Case& c, const ExplainerConfig& config);

/*
 * Explains every case. Per-case work runs in parallel; per-case seeds are
 * derived from (config.seed, case index) so results do not depend on
 * scheduling. seconds[i] receives the wall time spent on case i (for
 * feature_permutation the batch time split evenly).
 */
std::vector<Heatmap> explain_dataset(Oracle& oracle, const DatasetManifest& dataset,
                                     const ExplainerConfig& config, std::vector<double>* seconds);

}  // namespace msfi
