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

#include <algorithm>
#include <vector>

#include "msfi/parallel.hpp"

namespace msfi {

template <typename MakeInput>
std::vector<int> predict_classes(Oracle& oracle, std::size_t n, MakeInput&& make_input,
                                 std::size_t chunk) {
  std::vector<int> out;
  out.reserve(n);
  std::vector<Image> batch;
  for (std::size_t start = 0; start < n; start += chunk) {
    const std::size_t count = std::min(chunk, n - start);
    batch.assign(count, Image{});
    parallel_for(count, [&](std::size_t i) { batch[i] = make_input(start + i); });
    for (const auto& p : oracle.predict_batch(batch)) out.push_back(argmax(p));
  }
  return out;
}

}  // namespace msfi
