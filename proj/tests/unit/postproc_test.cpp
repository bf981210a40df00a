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

#include "doctest.h"
#include "msfi/errors.hpp"
#include "msfi/metrics.hpp"
#include "msfi/postproc.hpp"
#include "support.hpp"

using namespace msfi;
using msfi::testing::heatmap_of;

TEST_CASE("rectify modes") {
  const auto h = heatmap_of({3}, {-1, 0, 2}, false);
  CHECK(rectify(h, RectifyMode::kClipNegative).values.storage() == std::vector<double>{0, 0, 2});
  CHECK(rectify(h, RectifyMode::kAbsolute).values.storage() == std::vector<double>{1, 0, 2});
  CHECK(rectify(h).rectified);
  const auto zero = heatmap_of({4}, {0, 0, 0, 0}, false);
  CHECK(rectify(zero).values == zero.values);
  CHECK(parse_rectify_mode("absolute") == RectifyMode::kAbsolute);
  CHECK_THROWS_AS(parse_rectify_mode("square"), UsageError);
}

TEST_CASE("normalize_joint divides by the global maximum") {
  const auto a = normalize_joint(heatmap_of({3}, {0, 0, 2}));
  CHECK(a.heatmap.values.storage() == std::vector<double>{0, 0, 1});
  CHECK_FALSE(a.degenerate);

  // Two modalities with maxima 4 and 2.
  const auto b = normalize_joint(heatmap_of({2, 2}, {4, 1, 2, 0}));
  CHECK(b.heatmap.values.storage() == std::vector<double>{1, 0.25, 0.5, 0});

  const auto z = normalize_joint(heatmap_of({2, 2}, {0, 0, 0, 0}));
  CHECK(z.degenerate);
  CHECK(z.heatmap.values.storage() == std::vector<double>{0, 0, 0, 0});
}

TEST_CASE("normalize_joint is idempotent and keeps the MI ranking") {
  Rng rng(4);
  for (int t = 0; t < 100; ++t) {
    Heatmap h{Tensor<double>({4, 5, 5}), true};
    for (auto& v : h.values.values()) v = rng.uniform() * (1 + rng.below(10));
    const auto once = normalize_joint(h).heatmap;
    const auto twice = normalize_joint(once).heatmap;
    CHECK(once.values == twice.values);
    const auto before = estimated_mi(h).values, after = estimated_mi(once).values;
    for (std::size_t i = 0; i < 4; ++i) {
      for (std::size_t j = 0; j < 4; ++j) CHECK((before[i] < before[j]) == (after[i] < after[j]));
    }
  }
}
