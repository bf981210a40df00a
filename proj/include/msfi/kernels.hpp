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
#include <vector>

#include "msfi/tensor.hpp"

namespace msfi::kernels {

// Per-modality reductions over heatmaps. The default implementations split
// each modality into fixed-size blocks reduced in parallel and combined in
// block order, so results are bit-identical for any thread count. The
// `serial` namespace keeps straight-loop references for testing and
// benchmarking.

inline constexpr std::size_t kBlockSize = 16384;

struct MaskedSums {
  std::vector<double> inside;  // sum of values where mask > 0, per modality
  std::vector<double> total;   // sum of all values, per modality
};

/// Sum of max(value, 0) per modality.
std::vector<double> positive_sums(const Tensor<double>& values);

/// Inside-mask and total sums per modality (values taken as-is).
MaskedSums masked_sums(const Tensor<double>& values, const MaskSet& masks);

/// Global maximum; -inf for an empty tensor.
double max_value(const Tensor<double>& values);

namespace serial {
std::vector<double> positive_sums(const Tensor<double>& values);
MaskedSums masked_sums(const Tensor<double>& values, const MaskSet& masks);
double max_value(const Tensor<double>& values);
}  // namespace serial

}  // namespace msfi::kernels
