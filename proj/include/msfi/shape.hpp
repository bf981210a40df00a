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
#include <span>
#include <vector>

namespace msfi::shape {

struct Outline {
  double perimeter = 0.0;
  double area = 0.0;
};

/// Perimeter and enclosed area of the marching-squares contour of a binary
/// image (row-major, rows x cols) with an implicit zero border. Saddle
/// cells are resolved as two separate corners.
Outline marching_squares(std::span<const std::uint8_t> binary, std::size_t rows, std::size_t cols);

/// P^2 / (4 pi A); 1 for a disk, larger for irregular outlines. 0 when empty.
double compactness(std::span<const std::uint8_t> binary, std::size_t rows, std::size_t cols);

/// Mean over a width x width window with zero padding (width odd).
std::vector<double> box_blur(std::span<const float> image, std::size_t rows, std::size_t cols,
                             std::size_t width);

/// Number of 8-connected foreground components.
std::size_t component_count(std::span<const std::uint8_t> binary, std::size_t rows,
                            std::size_t cols);

}  // namespace msfi::shape
