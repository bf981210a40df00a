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

#include "msfi/tensor.hpp"

namespace msfi {

enum class RectifyMode { kClipNegative, kAbsolute };

/// Maps raw attributions to non-negative values: max(x, 0) or |x|.
Heatmap rectify(const Heatmap& heatmap, RectifyMode mode = RectifyMode::kClipNegative);

struct NormalizedHeatmap {
  Heatmap heatmap;
  bool degenerate = false;  // input was all zero and is returned unchanged
};

/// Divides by the single maximum over all modalities jointly. Per-modality
/// scaling is never applied: it would erase relative modality magnitudes.
NormalizedHeatmap normalize_joint(const Heatmap& heatmap);

RectifyMode parse_rectify_mode(const std::string& name);

}  // namespace msfi
