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
#include <utility>
#include <vector>

#include "msfi/manifest.hpp"

namespace msfi::synth {

enum class ShapeClass : int { kRound = 0, kIrregular = 1 };

/// Star-shaped binary blob on a size x size grid, row-major.
std::vector<std::uint8_t> make_shape(ShapeClass cls, std::uint64_t seed, std::size_t size);

struct Intensities {
  // Per-modality constants in T1, T1C, T2, FLAIR order.
  std::vector<double> background{0.35, 0.30, 0.40, 0.35};
  std::vector<double> tumor{0.80, 1.00, 0.90, 0.95};
  double noise_sigma = 0.03;
  double noise_clip = 2.5;        // in units of sigma
  double ellipse_x = 0.42;        // semi-axes as fractions of size
  double ellipse_y = 0.36;
};

struct Config {
  std::size_t n = 200;
  std::uint64_t seed = 0;
  double p_flair = 0.7;
  std::size_t size = 128;
  bool tumor_only = false;
  Intensities intensities;
};

inline constexpr std::size_t kT1 = 0, kT1c = 1, kT2 = 2, kFlair = 3;

/*
 * Balanced two-class dataset: T1C carries the label's shape class on every
 * case, FLAIR on a Bernoulli(p_flair) subset (flipped otherwise), T1 and T2
 * carry random shapes. Per-case randomness is derived from (seed, index), so
 * output is independent of thread count. Per-case shape classes are stored
 * in manifest.generator["shape_classes"].
 */
DatasetManifest generate_dataset(const Config& config);

/// Tumor-only probes: first has T1C aligned and FLAIR flipped, second the reverse.
std::pair<DatasetManifest, DatasetManifest> generate_probe_sets(std::size_t n, std::uint64_t seed,
                                                                std::size_t size);

}  // namespace msfi::synth
