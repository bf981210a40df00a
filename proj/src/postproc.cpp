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

#include "msfi/postproc.hpp"

#include <cmath>

#include "msfi/kernels.hpp"

namespace msfi {

Heatmap rectify(const Heatmap& heatmap, RectifyMode mode) {
  Heatmap out{heatmap.values, true};
  for (double& v : out.values.values()) {
    v = mode == RectifyMode::kAbsolute ? std::fabs(v) : std::max(v, 0.0);
    // Avoid -0.0 so written files do not depend on the sign of zero inputs.
    if (v == 0.0) v = 0.0;
  }
  return out;
}

NormalizedHeatmap normalize_joint(const Heatmap& heatmap) {
  if (heatmap.values.empty()) return {heatmap, true};
  const double peak = kernels::max_value(heatmap.values);
  if (!(peak > 0.0)) return {heatmap, true};
  Heatmap out{heatmap.values, heatmap.rectified};
  for (double& v : out.values.values()) v /= peak;
  return {std::move(out), false};
}

RectifyMode parse_rectify_mode(const std::string& name) {
  if (name == "clip" || name == "clip_negative" || name == "clip-negative") {
    return RectifyMode::kClipNegative;
  }
  if (name == "abs" || name == "absolute") return RectifyMode::kAbsolute;
  throw UsageError("unknown rectify mode '" + name + "' (expected clip_negative or absolute)");
}

}  // namespace msfi
