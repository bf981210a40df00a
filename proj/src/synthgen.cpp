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

#include "msfi/synthgen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "msfi/parallel.hpp"
#include "msfi/random.hpp"

namespace msfi::synth {

namespace {

constexpr std::uint64_t kLabelStream = 0x6c6162656c;  // "label"
constexpr std::uint64_t kCaseStream = 0x63617365;     // "case"
constexpr std::uint64_t kProbeT1cStream = 0x70726f626531;
constexpr std::uint64_t kProbeFlairStream = 0x70726f626532;

// Alignment probabilities of the two informative modalities.
struct Alignment {
  double t1c = 1.0;
  double flair = 0.7;
};

ShapeClass flip(ShapeClass c) {
  return c == ShapeClass::kRound ? ShapeClass::kIrregular : ShapeClass::kRound;
}

std::string case_id(std::size_t i, std::size_t n) {
  const std::size_t width = std::max<std::size_t>(4, std::to_string(n - 1).size());
  std::string digits = std::to_string(i);
  return "case_" + std::string(width - digits.size(), '0') + digits;
}

void check(const Config& config) {
  if (config.n < 2 || config.n % 2 != 0) {
    throw UsageError("case count must be even and at least 2, got " + std::to_string(config.n));
  }
  if (!(config.p_flair >= 0.0 && config.p_flair <= 1.0)) {
    throw UsageError("p_flair must lie in [0, 1]");
  }
  if (config.size < 8) throw UsageError("image size must be at least 8");
  const auto& in = config.intensities;
  if (in.background.size() != 4 || in.tumor.size() != 4) {
    throw UsageError("intensity tables need one entry per modality (4)");
  }
}

DatasetManifest generate(const Config& config, Alignment align, std::uint64_t stream,
                         const std::string& kind) {
  check(config);
  const std::size_t n = config.n, size = config.size, plane = size * size;
  const auto& in = config.intensities;

  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = i < n / 2 ? 0 : 1;
  Rng label_rng(derive_seed(config.seed, stream ^ kLabelStream));
  label_rng.shuffle(std::span<int>(labels));

  std::vector<std::uint8_t> ellipse(plane, 0);
  for (std::size_t r = 0; r < size; ++r) {
    for (std::size_t c = 0; c < size; ++c) {
      const double dx = (c + 0.5 - size / 2.0) / (in.ellipse_x * size);
      const double dy = (r + 0.5 - size / 2.0) / (in.ellipse_y * size);
      ellipse[r * size + c] = dx * dx + dy * dy <= 1.0;
    }
  }

  DatasetManifest out;
  out.modality_names = default_modality_names(4);
  out.num_classes = 2;
  out.cases.resize(n);
  std::vector<std::array<int, 4>> classes(n);

  parallel_for(n, [&](std::size_t i) {
    Rng rng(derive_seed(config.seed, stream ^ kCaseStream, i));
    const auto label = static_cast<ShapeClass>(labels[i]);
    std::array<ShapeClass, 4> cls{};
    cls[kT1c] = rng.bernoulli(align.t1c) ? label : flip(label);
    cls[kFlair] = rng.bernoulli(align.flair) ? label : flip(label);
    cls[kT1] = static_cast<ShapeClass>(rng.below(2));
    cls[kT2] = static_cast<ShapeClass>(rng.below(2));

    Image image(Shape{4, size, size}, 0.0f);
    MaskSet masks(Shape{4, size, size}, 0);
    const double sigma = in.noise_sigma, clip = in.noise_clip * in.noise_sigma;
    for (std::size_t m = 0; m < 4; ++m) {
      const auto blob = make_shape(cls[m], rng.next(), size);
      auto pixels = image.modality(m);
      auto mask = masks.modality(m);
      for (std::size_t p = 0; p < plane; ++p) {
        const double noise = std::clamp(sigma * rng.normal(), -clip, clip);
        if (blob[p]) {
          pixels[p] = static_cast<float>(in.tumor[m] + noise);
          mask[p] = 1;
        } else if (ellipse[p] && !config.tumor_only) {
          pixels[p] = static_cast<float>(in.background[m] + noise);
        }
      }
      classes[i][m] = static_cast<int>(cls[m]);
    }
    out.cases[i] = Case{case_id(i, n), std::move(image), labels[i], std::move(masks), std::nullopt};
  });

  out.generator = {
      {"name", "msfi-synth"},
      {"kind", kind},
      {"n", n},
      {"seed", config.seed},
      {"p_t1c", align.t1c},
      {"p_flair", align.flair},
      {"size", size},
      {"tumor_only", config.tumor_only},
      {"background", in.background},
      {"tumor", in.tumor},
      {"noise_sigma", in.noise_sigma},
      {"noise_clip", in.noise_clip},
      {"ellipse", {in.ellipse_x, in.ellipse_y}},
      {"shape_classes", classes},
  };
  return out;
}

}  // namespace

std::vector<std::uint8_t> make_shape(ShapeClass cls, std::uint64_t seed, std::size_t size) {
  Rng rng(seed);
  const double s = static_cast<double>(size);
  const double radius = rng.uniform(0.08, 0.15) * s;
  const double cx = rng.uniform(0.2, 0.8) * s;
  const double cy = rng.uniform(0.2, 0.8) * s;
  double amplitude;
  std::int64_t lobes;
  if (cls == ShapeClass::kRound) {
    amplitude = rng.uniform(0.0, 0.05);
    lobes = rng.integer(2, 5);
  } else {
    amplitude = rng.uniform(0.3, 0.6);
    lobes = rng.integer(5, 9);
  }
  const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);

  std::vector<std::uint8_t> out(size * size, 0);
  for (std::size_t r = 0; r < size; ++r) {
    for (std::size_t c = 0; c < size; ++c) {
      const double dx = c + 0.5 - cx, dy = r + 0.5 - cy;
      const double theta = std::atan2(dy, dx);
      const double bound = radius * (1.0 + amplitude * std::cos(lobes * theta + phase));
      out[r * size + c] = std::hypot(dx, dy) <= bound;
    }
  }
  return out;
}

DatasetManifest generate_dataset(const Config& config) {
  return generate(config, Alignment{1.0, config.p_flair}, 0, "dataset");
}

std::pair<DatasetManifest, DatasetManifest> generate_probe_sets(std::size_t n, std::uint64_t seed,
                                                                std::size_t size) {
  Config config;
  config.n = n;
  config.seed = seed;
  config.size = size;
  config.tumor_only = true;
  return {generate(config, Alignment{1.0, 0.0}, kProbeT1cStream, "probe_t1c"),
          generate(config, Alignment{0.0, 1.0}, kProbeFlairStream, "probe_flair")};
}

}  // namespace msfi::synth
