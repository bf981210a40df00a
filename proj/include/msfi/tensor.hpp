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
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "msfi/errors.hpp"

namespace msfi {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         [](std::size_t a, std::size_t b) { return a * b; });
}

std::string shape_to_string(const Shape& shape);

// Dense row-major array. Axis 0 is the modality axis everywhere in this
// project, so a few helpers expose per-modality slices directly.
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;
  explicit Tensor(Shape shape, T fill = T{})
      : shape_(std::move(shape)), data_(shape_size(shape_), fill) {}
  Tensor(Shape shape, std::vector<T> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != shape_size(shape_)) {
      throw DataError("tensor data size " + std::to_string(data_.size()) +
                      " does not match shape " + shape_to_string(shape_));
    }
  }

  const Shape& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::size_t modalities() const { return shape_.empty() ? 0 : shape_[0]; }
  std::size_t spatial_size() const {
    return modalities() == 0 ? 0 : data_.size() / modalities();
  }
  Shape spatial_shape() const {
    return shape_.empty() ? Shape{} : Shape(shape_.begin() + 1, shape_.end());
  }

  std::span<T> modality(std::size_t m) {
    return {data_.data() + m * spatial_size(), spatial_size()};
  }
  std::span<const T> modality(std::size_t m) const {
    return {data_.data() + m * spatial_size(), spatial_size()};
  }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }
  std::vector<T>& storage() { return data_; }
  const std::vector<T>& storage() const { return data_; }

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_;
  std::vector<T> data_;
};

/// Model input X: M modality channels stacked on axis 0.
using Image = Tensor<float>;
/// Per-modality binary localization masks L_m, values in {0,1}.
using MaskSet = Tensor<std::uint8_t>;

/// Attribution map S with the image's shape. Values are held in double so
/// metric identities can be checked tightly; files store float32.
struct Heatmap {
  Tensor<double> values;
  bool rectified = false;
};

template <typename To, typename From>
Tensor<To> tensor_cast(const Tensor<From>& src) {
  std::vector<To> out(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) out[i] = static_cast<To>(src[i]);
  return Tensor<To>(src.shape(), std::move(out));
}

}  // namespace msfi
