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

#include "msfi/kernels.hpp"

#include <algorithm>
#include <limits>

#include "msfi/parallel.hpp"

namespace msfi::kernels {

namespace {

struct Block {
  std::size_t modality;
  std::size_t begin;
  std::size_t end;
};

std::vector<Block> make_blocks(std::size_t modalities, std::size_t spatial) {
  std::vector<Block> blocks;
  for (std::size_t m = 0; m < modalities; ++m) {
    for (std::size_t b = 0; b < spatial; b += kBlockSize) {
      blocks.push_back({m, m * spatial + b, m * spatial + std::min(spatial, b + kBlockSize)});
    }
  }
  return blocks;
}

void require_same_shape(const Tensor<double>& values, const MaskSet& masks) {
  if (values.shape() != masks.shape()) {
    throw DataError("shape mismatch: heatmap " + shape_to_string(values.shape()) + " vs masks " +
                    shape_to_string(masks.shape()));
  }
}

}  // namespace

std::vector<double> positive_sums(const Tensor<double>& values) {
  const auto blocks = make_blocks(values.modalities(), values.spatial_size());
  std::vector<double> partial(blocks.size(), 0.0);
  const double* v = values.values().data();
  parallel_for(blocks.size(), [&](std::size_t b) {
    double acc = 0.0;
#pragma omp simd reduction(+ : acc)
    for (std::size_t i = blocks[b].begin; i < blocks[b].end; ++i) acc += std::max(v[i], 0.0);
    partial[b] = acc;
  });
  std::vector<double> out(values.modalities(), 0.0);
  for (std::size_t b = 0; b < blocks.size(); ++b) out[blocks[b].modality] += partial[b];
  return out;
}

MaskedSums masked_sums(const Tensor<double>& values, const MaskSet& masks) {
  require_same_shape(values, masks);
  const auto blocks = make_blocks(values.modalities(), values.spatial_size());
  std::vector<double> part_in(blocks.size(), 0.0), part_total(blocks.size(), 0.0);
  const double* v = values.values().data();
  const std::uint8_t* l = masks.values().data();
  parallel_for(blocks.size(), [&](std::size_t b) {
    double in = 0.0, total = 0.0;
#pragma omp simd reduction(+ : in, total)
    for (std::size_t i = blocks[b].begin; i < blocks[b].end; ++i) {
      total += v[i];
      in += l[i] > 0 ? v[i] : 0.0;
    }
    part_in[b] = in;
    part_total[b] = total;
  });
  MaskedSums out{std::vector<double>(values.modalities(), 0.0),
                 std::vector<double>(values.modalities(), 0.0)};
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    out.inside[blocks[b].modality] += part_in[b];
    out.total[blocks[b].modality] += part_total[b];
  }
  return out;
}

double max_value(const Tensor<double>& values) {
  const auto blocks = make_blocks(values.modalities(), values.spatial_size());
  std::vector<double> partial(blocks.size(), -std::numeric_limits<double>::infinity());
  const double* v = values.values().data();
  parallel_for(blocks.size(), [&](std::size_t b) {
    double acc = -std::numeric_limits<double>::infinity();
    for (std::size_t i = blocks[b].begin; i < blocks[b].end; ++i) acc = std::max(acc, v[i]);
    partial[b] = acc;
  });
  double out = -std::numeric_limits<double>::infinity();
  for (double p : partial) out = std::max(out, p);
  return out;
}

namespace serial {

std::vector<double> positive_sums(const Tensor<double>& values) {
  std::vector<double> out(values.modalities(), 0.0);
  for (std::size_t m = 0; m < values.modalities(); ++m) {
    for (double x : values.modality(m)) out[m] += std::max(x, 0.0);
  }
  return out;
}

MaskedSums masked_sums(const Tensor<double>& values, const MaskSet& masks) {
  require_same_shape(values, masks);
  MaskedSums out{std::vector<double>(values.modalities(), 0.0),
                 std::vector<double>(values.modalities(), 0.0)};
  for (std::size_t m = 0; m < values.modalities(); ++m) {
    auto v = values.modality(m);
    auto l = masks.modality(m);
    for (std::size_t i = 0; i < v.size(); ++i) {
      out.total[m] += v[i];
      if (l[i] > 0) out.inside[m] += v[i];
    }
  }
  return out;
}

double max_value(const Tensor<double>& values) {
  double out = -std::numeric_limits<double>::infinity();
  for (double x : values.values()) out = std::max(out, x);
  return out;
}

}  // namespace serial

}  // namespace msfi::kernels
