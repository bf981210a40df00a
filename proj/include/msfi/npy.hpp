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

#include "msfi/tensor.hpp"

namespace msfi {

// NPY version 1.0 reader/writer. Payloads are C-order little-endian.
// Supported dtypes: '<f4', '<f8', '|u1', '|b1'.

enum class NpyDtype { kFloat32, kFloat64, kUint8, kBool };

struct NpyHeader {
  NpyDtype dtype = NpyDtype::kFloat32;
  Shape shape;
  std::size_t payload_offset = 0;
};

/// Parses the header; throws DataError on anything that is not NPY v1.0.
NpyHeader parse_npy_header(const std::string& bytes);

void write_npy(const std::filesystem::path& path, const Tensor<float>& array);
void write_npy(const std::filesystem::path& path, const Tensor<double>& array);
void write_npy(const std::filesystem::path& path, const Tensor<std::uint8_t>& array);

Tensor<float> read_npy_f32(const std::filesystem::path& path);
Tensor<double> read_npy_f64(const std::filesystem::path& path);
/// Reads a mask array; any non-{0,1} value is rejected.
Tensor<std::uint8_t> read_npy_mask(const std::filesystem::path& path);

/// Heatmaps are stored as float32.
void write_heatmap(const std::filesystem::path& path, const Heatmap& heatmap);
Heatmap read_heatmap(const std::filesystem::path& path);

}  // namespace msfi
