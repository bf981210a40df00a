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

#include "msfi/explainers.hpp"

// Cases are already explained in parallel; keep Eigen single-threaded.
#define EIGEN_DONT_PARALLELIZE
#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>

#include "msfi/parallel.hpp"
#include "msfi/random.hpp"

namespace msfi {

namespace {

constexpr std::uint64_t kSamplingStream = 0x737673;     // "svs"
constexpr std::uint64_t kCoalitionStream = 0x636f616c;  // "coal"
constexpr std::uint64_t kPermutationStream = 0x7065726d;
constexpr std::uint64_t kReferenceStream = 0x726566;
constexpr std::uint64_t kCaseStream = 0x6578706c;
constexpr double kBoundaryWeight = 1e6;
constexpr std::size_t kMaxEnumeratedGroups = 20;

using Clock = std::chrono::steady_clock;

Heatmap zero_heatmap(const Shape& shape) { return Heatmap{Tensor<double>(shape, 0.0), false}; }

// Scores of `count` lazily built inputs for one class, dispatched in
// oracle-sized batches.
std::vector<double> scores(Oracle& oracle, int cls, std::size_t count,
                           const std::function<Image(std::size_t)>& make) {
  std::vector<double> out;
  out.reserve(count);
  std::vector<Image> batch;
  for (std::size_t start = 0; start < count; start += kMaxBatch) {
    const std::size_t n = std::min(kMaxBatch, count - start);
    batch.assign(n, Image{});
    parallel_for(n, [&](std::size_t i) { batch[i] = make(start + i); });
    for (const auto& p : oracle.predict_batch(batch)) out.push_back(p[cls]);
  }
  return out;
}

void check_grouping(const FeatureGrouping& g, const Image& input) {
  if (g.shape != input.shape()) {
    throw DataError("grouping shape " + shape_to_string(g.shape) + " does not match input " +
                    shape_to_string(input.shape()));
  }
}

void paint(Heatmap& h, const std::vector<std::size_t>& voxels, double value) {
  for (std::size_t v : voxels) h.values[v] = value;
}

// Input with every group whose bit is clear set to the baseline.
Image coalition_input(const Image& input, const std::vector<std::vector<std::size_t>>& members,
                      const std::vector<std::uint8_t>& present, double baseline) {
  Image out = input;
  for (std::size_t g = 0; g < members.size(); ++g) {
    if (present[g]) continue;
    for (std::size_t v : members[g]) out[v] = static_cast<float>(baseline);
  }
  return out;
}

// Enumerated (all 2^G) or sampled coalitions, boundaries always included.
std::vector<std::vector<std::uint8_t>> coalitions(std::size_t groups, int samples,
                                                  std::uint64_t seed) {
  std::vector<std::vector<std::uint8_t>> out;
  const bool enumerate = groups <= kMaxEnumeratedGroups &&
                         static_cast<double>(samples) >= std::ldexp(1.0, static_cast<int>(groups)) - 2;
  if (enumerate) {
    const std::uint64_t total = std::uint64_t{1} << groups;
    out.reserve(total);
    for (std::uint64_t mask = 0; mask < total; ++mask) {
      std::vector<std::uint8_t> z(groups);
      for (std::size_t g = 0; g < groups; ++g) z[g] = (mask >> g) & 1U;
      out.push_back(std::move(z));
    }
    return out;
  }
  out.emplace_back(groups, 0);
  out.emplace_back(groups, 1);
  Rng rng(derive_seed(seed, kCoalitionStream));
  while (out.size() < static_cast<std::size_t>(samples) + 2) {
    std::vector<std::uint8_t> z(groups);
    std::size_t size = 0;
    for (auto& bit : z) size += bit = static_cast<std::uint8_t>(rng.below(2));
    if (size == 0 || size == groups) continue;
    out.push_back(std::move(z));
  }
  return out;
}

// Weighted ridge regression y ~ b0 + z.b with the intercept unpenalized;
// returns b (without b0).
std::vector<double> weighted_ridge(const std::vector<std::vector<std::uint8_t>>& z,
                                   const std::vector<double>& y, const std::vector<double>& w,
                                   double lambda) {
  const auto rows = static_cast<Eigen::Index>(z.size());
  const auto groups = static_cast<Eigen::Index>(z.front().size());
  const Eigen::Index extra = lambda > 0.0 ? groups : 0;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows + extra, groups + 1);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(rows + extra);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const double s = std::sqrt(w[r]);
    a(r, 0) = s;
    for (Eigen::Index g = 0; g < groups; ++g) a(r, g + 1) = s * z[r][g];
    b(r) = s * y[r];
  }
  for (Eigen::Index g = 0; g < extra; ++g) a(rows + g, g + 1) = std::sqrt(lambda);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  if (qr.rank() < groups + 1) {
    throw DataError("singular regression system (rank " + std::to_string(qr.rank()) + " < " +
                    std::to_string(groups + 1) + "); add samples or ridge strength");
  }
  const Eigen::VectorXd x = qr.solve(b);
  return std::vector<double>(x.data() + 1, x.data() + x.size());
}

Heatmap regression_explainer(Oracle& oracle, const Image& input, const FeatureGrouping& grouping,
                             int samples, double baseline, double lambda, std::uint64_t seed,
                             const std::function<double(std::size_t)>& weight_of_size) {
  check_grouping(grouping, input);
  const std::size_t G = grouping.count;
  if (G < 2) throw UsageError("regression explainers need at least 2 groups");
  if (samples < 1) throw UsageError("samples must be >= 1");
  const auto target = score_target(oracle, input);
  const auto members = grouping.members();
  const auto z = coalitions(G, samples, seed);
  const auto y = scores(oracle, target.predicted_class, z.size(), [&](std::size_t i) {
    return coalition_input(input, members, z[i], baseline);
  });
  std::vector<double> w(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    w[i] = weight_of_size(static_cast<std::size_t>(std::count(z[i].begin(), z[i].end(), 1)));
  }
  const auto coef = weighted_ridge(z, y, w, lambda);
  Heatmap out = zero_heatmap(input.shape());
  for (std::size_t g = 0; g < G; ++g) paint(out, members[g], coef[g]);
  return out;
}

double binomial(std::size_t n, std::size_t k) {
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

int default_samples(const std::string& method, std::size_t groups) {
  if (method == "shapley_value_sampling") return 16;
  if (method == "kernel_shap" || method == "lime") {
    return static_cast<int>(std::max<std::size_t>(2 * groups + 2, 512));
  }
  return 1;
}

}  // namespace

std::vector<std::vector<std::size_t>> FeatureGrouping::members() const {
  std::vector<std::vector<std::size_t>> out(count);
  for (std::size_t v = 0; v < group.size(); ++v) out[group[v]].push_back(v);
  return out;
}

FeatureGrouping segment_grid(const Shape& image_shape, std::size_t patch) {
  if (patch == 0) throw UsageError("patch size must be >= 1");
  if (image_shape.size() < 2) throw DataError("grouping needs a modality axis and spatial axes");
  const Shape spatial(image_shape.begin() + 1, image_shape.end());
  Shape cells(spatial.size());
  for (std::size_t d = 0; d < spatial.size(); ++d) cells[d] = (spatial[d] + patch - 1) / patch;
  const std::size_t per_modality = shape_size(cells), plane = shape_size(spatial);

  FeatureGrouping g;
  g.shape = image_shape;
  g.count = image_shape[0] * per_modality;
  g.group.resize(shape_size(image_shape));
  for (std::size_t p = 0; p < plane; ++p) {
    // Row-major unravel of p, then ravel of the cell coordinates.
    std::size_t rest = p, cell = 0, stride = 1;
    for (std::size_t d = spatial.size(); d-- > 0;) {
      cell += (rest % spatial[d]) / patch * stride;
      stride *= cells[d];
      rest /= spatial[d];
    }
    for (std::size_t m = 0; m < image_shape[0]; ++m) {
      g.group[m * plane + p] = static_cast<std::uint32_t>(m * per_modality + cell);
    }
  }
  g.description = std::to_string(patch) + "-voxel grid per modality (" + std::to_string(g.count) +
                  " groups)";
  return g;
}

FeatureGrouping segment_masks(const MaskSet& masks) {
  FeatureGrouping g;
  g.shape = masks.shape();
  g.group.resize(masks.size());
  const std::size_t plane = masks.spatial_size();
  std::uint32_t next = 0;
  for (std::size_t m = 0; m < masks.modalities(); ++m) {
    const auto mask = masks.modality(m);
    const auto inside = static_cast<std::size_t>(std::count(mask.begin(), mask.end(), 1));
    const std::uint32_t background = inside < plane ? next++ : 0;
    const std::uint32_t region = inside > 0 ? next++ : 0;
    for (std::size_t p = 0; p < plane; ++p) g.group[m * plane + p] = mask[p] ? region : background;
  }
  g.count = next;
  g.description = "mask/background per modality (" + std::to_string(g.count) + " groups)";
  return g;
}

nlohmann::json to_json(const ExplainerConfig& c) {
  return {{"method", c.method}, {"baseline", c.baseline}, {"samples", c.samples},
          {"window", c.window}, {"stride", c.stride},     {"patch", c.patch},
          {"grouping", c.grouping}, {"sigma", std::isfinite(c.sigma) ? nlohmann::json(c.sigma) : nlohmann::json("inf")},
          {"lambda", c.lambda}, {"seed", c.seed}};
}

const std::vector<std::string>& explainer_names() {
  static const std::vector<std::string> names{
      "occlusion", "feature_ablation", "shapley_value_sampling", "kernel_shap",
      "lime",      "feature_permutation", "uniform",             "random"};
  return names;
}

bool is_explainer(const std::string& name) {
  const auto& names = explainer_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

ScoreTarget score_target(Oracle& oracle, const Image& input) {
  const auto probs = oracle.predict_batch(std::span<const Image>(&input, 1)).front();
  const int cls = argmax(probs);
  return {cls, probs[cls]};
}

Heatmap occlusion(Oracle& oracle, const Image& input, std::size_t window, std::size_t stride,
                  double baseline) {
  if (window == 0 || stride == 0) throw UsageError("occlusion window and stride must be >= 1");
  const Shape spatial = input.spatial_shape();
  const std::size_t plane = input.spatial_size(), dims = spatial.size();
  for (std::size_t extent : spatial) {
    if (window > extent) throw UsageError("occlusion window exceeds the modality extent");
  }
  // Start offsets per axis; the last window is flush with the far edge.
  std::vector<std::vector<std::size_t>> starts(dims);
  for (std::size_t d = 0; d < dims; ++d) {
    for (std::size_t s = 0; s + window <= spatial[d]; s += stride) starts[d].push_back(s);
    if (starts[d].back() + window != spatial[d]) starts[d].push_back(spatial[d] - window);
  }
  std::vector<std::vector<std::size_t>> boxes;  // voxel lists of each window within a plane
  std::vector<std::size_t> pick(dims, 0);
  while (true) {
    std::vector<std::size_t> voxels{0};
    for (std::size_t d = 0; d < dims; ++d) {
      std::vector<std::size_t> grown;
      grown.reserve(voxels.size() * window);
      for (std::size_t base : voxels) {
        for (std::size_t k = 0; k < window; ++k) grown.push_back(base * spatial[d] + starts[d][pick[d]] + k);
      }
      voxels = std::move(grown);
    }
    boxes.push_back(std::move(voxels));
    std::size_t d = dims;
    while (d-- > 0) {
      if (++pick[d] < starts[d].size()) break;
      pick[d] = 0;
    }
    if (d == static_cast<std::size_t>(-1)) break;
  }

  const auto target = score_target(oracle, input);
  const std::size_t per_modality = boxes.size(), total = input.modalities() * per_modality;
  const auto occluded = scores(oracle, target.predicted_class, total, [&](std::size_t j) {
    Image x = input;
    const std::size_t offset = (j / per_modality) * plane;
    for (std::size_t v : boxes[j % per_modality]) x[offset + v] = static_cast<float>(baseline);
    return x;
  });

  Heatmap out = zero_heatmap(input.shape());
  std::vector<std::uint32_t> covered(input.size(), 0);
  for (std::size_t j = 0; j < total; ++j) {
    const std::size_t offset = (j / per_modality) * plane;
    const double delta = target.score - occluded[j];
    for (std::size_t v : boxes[j % per_modality]) {
      out.values[offset + v] += delta;
      ++covered[offset + v];
    }
  }
  for (std::size_t i = 0; i < input.size(); ++i) {
    if (covered[i] > 0) out.values[i] /= covered[i];
  }
  return out;
}

Heatmap feature_ablation(Oracle& oracle, const Image& input, const FeatureGrouping& grouping,
                         double baseline) {
  check_grouping(grouping, input);
  const auto target = score_target(oracle, input);
  const auto members = grouping.members();
  const auto ablated = scores(oracle, target.predicted_class, grouping.count, [&](std::size_t g) {
    Image x = input;
    for (std::size_t v : members[g]) x[v] = static_cast<float>(baseline);
    return x;
  });
  Heatmap out = zero_heatmap(input.shape());
  for (std::size_t g = 0; g < grouping.count; ++g) paint(out, members[g], target.score - ablated[g]);
  return out;
}

Heatmap shapley_value_sampling(Oracle& oracle, const Image& input, const FeatureGrouping& grouping,
                               int samples, double baseline, std::uint64_t seed) {
  check_grouping(grouping, input);
  if (samples < 1) throw UsageError("samples must be >= 1");
  const std::size_t G = grouping.count;
  const auto target = score_target(oracle, input);
  const auto members = grouping.members();

  std::vector<std::vector<std::size_t>> orders(static_cast<std::size_t>(samples));
  for (std::size_t s = 0; s < orders.size(); ++s) {
    if (s % 2 == 1) {
      orders[s].assign(orders[s - 1].rbegin(), orders[s - 1].rend());
    } else {
      orders[s] = Rng(derive_seed(seed, kSamplingStream, s / 2)).permutation(G);
    }
  }

  Image empty = input;
  for (auto& v : empty.values()) v = static_cast<float>(baseline);
  const int cls = target.predicted_class;
  const double empty_score = scores(oracle, cls, 1, [&](std::size_t) { return empty; }).front();

  std::vector<double> phi(G, 0.0);
  for (const auto& order : orders) {
    const auto path = scores(oracle, cls, G, [&](std::size_t k) {
      Image x = empty;
      for (std::size_t j = 0; j <= k; ++j) {
        for (std::size_t v : members[order[j]]) x[v] = input[v];
      }
      return x;
    });
    double previous = empty_score;
    for (std::size_t k = 0; k < G; ++k) {
      phi[order[k]] += path[k] - previous;
      previous = path[k];
    }
  }
  Heatmap out = zero_heatmap(input.shape());
  for (std::size_t g = 0; g < G; ++g) paint(out, members[g], phi[g] / static_cast<double>(samples));
  return out;
}

Heatmap kernel_shap(Oracle& oracle, const Image& input, const FeatureGrouping& grouping,
                    int samples, double baseline, double lambda, std::uint64_t seed) {
  const std::size_t G = grouping.count;
  return regression_explainer(oracle, input, grouping, samples, baseline, lambda, seed,
                              [G](std::size_t s) {
                                if (s == 0 || s == G) return kBoundaryWeight;
                                return static_cast<double>(G - 1) /
                                       (binomial(G, s) * static_cast<double>(s * (G - s)));
                              });
}

Heatmap lime(Oracle& oracle, const Image& input, const FeatureGrouping& grouping, int samples,
             double sigma, double lambda, double baseline, std::uint64_t seed) {
  if (!(sigma > 0.0)) throw UsageError("lime kernel width must be > 0");
  const double G = static_cast<double>(grouping.count);
  return regression_explainer(oracle, input, grouping, samples, baseline, lambda, seed,
                              [G, sigma](std::size_t s) {
                                if (std::isinf(sigma)) return 1.0;
                                const double d = 1.0 - static_cast<double>(s) / G;
                                return std::exp(-d * d / (sigma * sigma));
                              });
}

std::vector<std::size_t> batch_permutation(std::size_t batch, std::uint64_t seed) {
  return Rng(derive_seed(seed, kPermutationStream)).permutation(batch);
}

std::vector<Heatmap> feature_permutation(Oracle& oracle, const std::vector<Image>& inputs,
                                         const FeatureGrouping& grouping,
                                         const std::vector<std::size_t>& permutation) {
  const std::size_t n = inputs.size();
  if (n < 2) throw UsageError("feature permutation needs a batch of at least 2 cases");
  if (permutation.size() != n) throw UsageError("permutation length does not match the batch");
  for (const auto& x : inputs) check_grouping(grouping, x);
  const auto members = grouping.members();
  const std::size_t G = grouping.count;

  std::vector<Heatmap> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto target = score_target(oracle, inputs[i]);
    const std::size_t source = permutation[i];
    const auto permuted = scores(oracle, target.predicted_class, G, [&](std::size_t g) {
      Image x = inputs[i];
      for (std::size_t v : members[g]) x[v] = inputs[source][v];
      return x;
    });
    Heatmap h = zero_heatmap(inputs[i].shape());
    for (std::size_t g = 0; g < G; ++g) paint(h, members[g], target.score - permuted[g]);
    out.push_back(std::move(h));
  }
  return out;
}

std::vector<Heatmap> feature_permutation(Oracle& oracle, const std::vector<Image>& inputs,
                                         const FeatureGrouping& grouping, std::uint64_t seed) {
  return feature_permutation(oracle, inputs, grouping, batch_permutation(inputs.size(), seed));
}

Heatmap reference_heatmap(const std::string& kind, const Shape& shape, std::uint64_t seed) {
  Heatmap h = zero_heatmap(shape);
  if (kind == "uniform") {
    for (auto& v : h.values.values()) v = 1.0;
  } else if (kind == "random") {
    Rng rng(derive_seed(seed, kReferenceStream));
    for (auto& v : h.values.values()) v = rng.uniform();
  } else {
    throw UsageError("unknown reference heatmap '" + kind + "'");
  }
  return h;
}

FeatureGrouping make_grouping(const ExplainerConfig& config, const Case& c) {
  if (config.grouping == "grid") return segment_grid(c.image.shape(), config.patch);
  if (config.grouping == "mask") {
    if (!c.masks) throw DataError("case '" + c.id + "': mask grouping needs masks");
    return segment_masks(*c.masks);
  }
  throw UsageError("unknown grouping '" + config.grouping + "' (expected grid or mask)");
}

Heatmap explain(Oracle& oracle, const Case& c, const ExplainerConfig& config) {
  const auto& m = config.method;
  if (m == "occlusion") return occlusion(oracle, c.image, config.window, config.stride, config.baseline);
  if (m == "uniform" || m == "random") return reference_heatmap(m, c.image.shape(), config.seed);
  if (m == "feature_permutation") throw UsageError("feature_permutation explains a batch, not one case");
  if (!is_explainer(m)) {
    std::string valid;
    for (const auto& name : explainer_names()) valid += (valid.empty() ? "" : ", ") + name;
    throw UsageError("unknown method '" + m + "' (valid: " + valid + ")");
  }
  const auto grouping = make_grouping(config, c);
  const int samples = config.samples > 0 ? config.samples : default_samples(m, grouping.count);
  if (m == "feature_ablation") return feature_ablation(oracle, c.image, grouping, config.baseline);
  if (m == "shapley_value_sampling") {
    return shapley_value_sampling(oracle, c.image, grouping, samples, config.baseline, config.seed);
  }
  if (m == "kernel_shap") {
    return kernel_shap(oracle, c.image, grouping, samples, config.baseline, config.lambda, config.seed);
  }
  return lime(oracle, c.image, grouping, samples, config.sigma, config.lambda, config.baseline,
              config.seed);
}

std::vector<Heatmap> explain_dataset(Oracle& oracle, const DatasetManifest& dataset,
                                     const ExplainerConfig& config, std::vector<double>* seconds) {
  const std::size_t n = dataset.cases.size();
  if (seconds) seconds->assign(n, 0.0);
  if (config.method == "feature_permutation") {
    if (config.grouping != "grid") throw UsageError("feature_permutation needs the grid grouping");
    const auto start = Clock::now();
    std::vector<Image> inputs;
    inputs.reserve(n);
    for (const auto& c : dataset.cases) inputs.push_back(c.image);
    auto out = feature_permutation(oracle, inputs, segment_grid(dataset.image_shape(), config.patch),
                                   config.seed);
    if (seconds && n > 0) {
      const double each = std::chrono::duration<double>(Clock::now() - start).count() / n;
      seconds->assign(n, each);
    }
    return out;
  }
  std::vector<Heatmap> out(n);
  parallel_for(n, [&](std::size_t i) {
    ExplainerConfig local = config;
    local.seed = derive_seed(config.seed, kCaseStream, i);
    const auto start = Clock::now();
    out[i] = explain(oracle, dataset.cases[i], local);
    if (seconds) (*seconds)[i] = std::chrono::duration<double>(Clock::now() - start).count();
  });
  return out;
}

}  // namespace msfi
