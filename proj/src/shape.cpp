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

#include "msfi/shape.hpp"

#include <cmath>
#include <numbers>

namespace msfi::shape {

Outline marching_squares(std::span<const std::uint8_t> binary, std::size_t rows,
                         std::size_t cols) {
  constexpr double kHalfDiagonal = std::numbers::sqrt2 / 2.0;
  // Copy into a grid with a one-cell zero border so every 2x2 cell is in range.
  const std::size_t pc = cols + 2;
  std::vector<std::uint8_t> grid((rows + 2) * pc, 0);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) grid[(r + 1) * pc + c + 1] = binary[r * cols + c] ? 1 : 0;
  }
  // Cell contributions by corner count; index 5 is the saddle case.
  std::size_t counts[6] = {0, 0, 0, 0, 0, 0};
  for (std::size_t r = 0; r + 1 < rows + 2; ++r) {
    const std::uint8_t* top = grid.data() + r * pc;
    const std::uint8_t* bottom = top + pc;
    for (std::size_t c = 0; c + 1 < pc; ++c) {
      const int tl = top[c], tr = top[c + 1], bl = bottom[c], br = bottom[c + 1];
      const int n = tl + tr + bl + br;
      ++counts[n == 2 && tl == br ? 5 : n];
    }
  }
  Outline out;
  out.perimeter = kHalfDiagonal * static_cast<double>(counts[1] + counts[3]) +
                  static_cast<double>(counts[2]) + 2.0 * kHalfDiagonal * static_cast<double>(counts[5]);
  out.area = 0.125 * static_cast<double>(counts[1]) + 0.5 * static_cast<double>(counts[2]) +
             0.875 * static_cast<double>(counts[3]) + static_cast<double>(counts[4]) +
             0.25 * static_cast<double>(counts[5]);
  return out;
}

double compactness(std::span<const std::uint8_t> binary, std::size_t rows, std::size_t cols) {
  const Outline o = marching_squares(binary, rows, cols);
  if (o.area <= 0.0) return 0.0;
  return o.perimeter * o.perimeter / (4.0 * std::numbers::pi * o.area);
}

std::vector<double> box_blur(std::span<const float> image, std::size_t rows, std::size_t cols,
                             std::size_t width) {
  std::vector<double> out(rows * cols, 0.0);
  if (width <= 1) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = image[i];
    return out;
  }
  const std::size_t half = width / 2;
  // Horizontal pass over a zero-padded copy of each row.
  std::vector<double> padded(cols + 2 * half, 0.0);
  std::vector<double> horizontal(rows * cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) padded[half + c] = image[r * cols + c];
    double* dst = horizontal.data() + r * cols;
    for (std::size_t d = 0; d < width; ++d) {
      const double* src = padded.data() + d;
      for (std::size_t c = 0; c < cols; ++c) dst[c] += src[c];
    }
  }
  // Vertical pass: rows outside the image contribute nothing.
  const double scale = 1.0 / static_cast<double>(width * width);
  for (std::size_t r = 0; r < rows; ++r) {
    double* dst = out.data() + r * cols;
    const std::size_t lo = r >= half ? r - half : 0;
    const std::size_t hi = std::min(rows - 1, r + half);
    for (std::size_t rr = lo; rr <= hi; ++rr) {
      const double* src = horizontal.data() + rr * cols;
      for (std::size_t c = 0; c < cols; ++c) dst[c] += src[c];
    }
    for (std::size_t c = 0; c < cols; ++c) dst[c] *= scale;
  }
  return out;
}

std::size_t component_count(std::span<const std::uint8_t> binary, std::size_t rows,
                            std::size_t cols) {
  std::vector<std::uint8_t> seen(rows * cols, 0);
  std::vector<std::size_t> stack;
  std::size_t count = 0;
  for (std::size_t start = 0; start < rows * cols; ++start) {
    if (!binary[start] || seen[start]) continue;
    ++count;
    seen[start] = 1;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      const auto r = static_cast<std::ptrdiff_t>(i / cols), c = static_cast<std::ptrdiff_t>(i % cols);
      for (std::ptrdiff_t dr = -1; dr <= 1; ++dr) {
        for (std::ptrdiff_t dc = -1; dc <= 1; ++dc) {
          const std::ptrdiff_t rr = r + dr, cc = c + dc;
          if (rr < 0 || cc < 0 || rr >= static_cast<std::ptrdiff_t>(rows) ||
              cc >= static_cast<std::ptrdiff_t>(cols)) {
            continue;
          }
          const std::size_t j = static_cast<std::size_t>(rr) * cols + static_cast<std::size_t>(cc);
          if (binary[j] && !seen[j]) {
            seen[j] = 1;
            stack.push_back(j);
          }
        }
      }
    }
  }
  return count;
}

}  // namespace msfi::shape
