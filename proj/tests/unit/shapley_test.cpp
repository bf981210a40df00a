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

#include <cmath>

#include "doctest.h"
#include "msfi/errors.hpp"
#include "msfi/oracle.hpp"
#include "msfi/shapley.hpp"
#include "msfi/synthgen.hpp"
#include "support.hpp"

using namespace msfi;
using msfi::testing::TempDir;

namespace {

// Fails every predict call after the first `ok` calls.
class FlakyOracle : public Oracle {
 public:
  explicit FlakyOracle(std::size_t ok) : ok_(ok) {}

 protected:
  OracleMeta do_handshake() override { return {2, {}, "flaky"}; }
  std::vector<Probabilities> do_predict(std::span<const Image> inputs) override {
    if (served_++ >= ok_) throw OracleError("transport closed");
    return std::vector<Probabilities>(inputs.size(), Probabilities{1.0, 0.0});
  }

 private:
  std::size_t ok_;
  std::atomic<std::size_t> served_{0};
};

DatasetManifest small_synthetic(std::size_t n = 20) {
  synth::Config config;
  config.n = n;
  config.seed = 3;
  config.size = 64;
  return synth::generate_dataset(config);
}

}  // namespace

TEST_CASE("shapley_from_table two-player example") {
  CoalitionTable t(2);
  t[0b00] = 0.5;
  t[0b01] = 0.9;
  t[0b10] = 0.6;
  t[0b11] = 1.0;
  const auto phi = shapley_from_table(t);
  CHECK(phi.values[0] == doctest::Approx(0.4));
  CHECK(phi.values[1] == doctest::Approx(0.1));
  CHECK_FALSE(phi.normalized);
}

TEST_CASE("constant table gives zero values; incomplete table is rejected") {
  CoalitionTable t(4);
  for (auto& v : t.values) v = 0.7;
  for (double v : shapley_from_table(t).values) CHECK(v == doctest::Approx(0.0));
  t[5] = std::numeric_limits<double>::quiet_NaN();
  CHECK_FALSE(t.complete());
  CHECK_THROWS_AS(shapley_from_table(t), DataError);
  CHECK_THROWS_AS(CoalitionTable(0), DataError);
  CHECK_THROWS_AS(CoalitionTable(kMaxShapleyModalities + 1), DataError);
}

TEST_CASE("permuting modalities permutes shapley values") {
  Rng rng(12);
  CoalitionTable t(3);
  for (auto& v : t.values) v = rng.uniform();
  // Swap modalities 0 and 2.
  CoalitionTable s(3);
  for (std::uint32_t c = 0; c < 8; ++c) {
    const std::uint32_t swapped = (c & 0b010) | ((c & 1) << 2) | ((c >> 2) & 1);
    s[swapped] = t[c];
  }
  const auto a = shapley_from_table(t), b = shapley_from_table(s);
  CHECK(a.values[0] == doctest::Approx(b.values[2]));
  CHECK(a.values[1] == doctest::Approx(b.values[1]));
  CHECK(a.values[2] == doctest::Approx(b.values[0]));
}

TEST_CASE("normalize_mi") {
  CHECK(normalize_mi(MiVector{{0, 0.5, 0, 0}}).values == std::vector<double>{0, 1, 0, 0});
  const auto n = normalize_mi(MiVector{{0.2, 0.4, -0.1, 0.4}});
  CHECK(n.normalized);
  CHECK(n.values[0] == doctest::Approx(0.5));
  CHECK(n.values[1] == 1.0);
  CHECK(n.values[2] == 0.0);
  CHECK(n.values[3] == 1.0);
  CHECK_THROWS_AS(normalize_mi(MiVector{{0, 0, 0}}), UndefinedError);
  CHECK_THROWS_AS(normalize_mi(MiVector{{-1, 0}}), UndefinedError);
}

TEST_CASE("characteristic values on the t1c-shape oracle") {
  const auto data = small_synthetic();
  auto oracle = make_oracle("builtin:t1c-shape", data.image_shape());
  const auto table = characteristic_values(*oracle, data, AblationMode::kWholeModality);
  REQUIRE(table.values.size() == 16);
  CHECK(table[table.full()] == doctest::Approx(accuracy(*oracle, data)));
  for (std::uint32_t c = 0; c < 16; ++c) {
    if (c & (1U << synth::kT1c)) {
      CHECK(table[c] == 1.0);
    } else {
      CHECK(table[c] == 0.5);
    }
  }
  const auto phi = shapley_from_table(table);
  CHECK(phi.values[synth::kT1c] == doctest::Approx(0.5));
  CHECK(normalize_mi(phi).values == std::vector<double>{0, 1, 0, 0});
}

TEST_CASE("feature-region ablation zeroes only masked voxels") {
  const auto data = small_synthetic(2);
  const auto& c = data.cases[0];
  const auto region = ablate_coalition(c, 0b0001, AblationMode::kFeatureRegion);
  const auto whole = ablate_coalition(c, 0b0001, AblationMode::kWholeModality);
  for (std::size_t i = 0; i < c.image.size(); ++i) {
    const bool kept = i < c.image.spatial_size();
    CHECK(whole[i] == (kept ? c.image[i] : 0.0f));
    CHECK(region[i] == (kept || !(*c.masks)[i] ? c.image[i] : 0.0f));
  }
  auto maskless = data;
  maskless.cases[1].masks.reset();
  auto oracle = make_oracle("builtin:t1c-shape", data.image_shape());
  CHECK_THROWS_AS(characteristic_values(*oracle, maskless, AblationMode::kFeatureRegion), DataError);
  CHECK(parse_ablation_mode("feature-region") == AblationMode::kFeatureRegion);
  CHECK(parse_ablation_mode("whole_modality") == AblationMode::kWholeModality);
  CHECK_THROWS_AS(parse_ablation_mode("half"), UsageError);
}

TEST_CASE("oracle failure yields a partial table, never a filled one") {
  const auto data = small_synthetic(4);
  FlakyOracle oracle(3);
  oracle.handshake();
  try {
    characteristic_values(oracle, data, AblationMode::kWholeModality);
    FAIL("expected PartialTableError");
  } catch (const PartialTableError& e) {
    CHECK_FALSE(e.partial().complete());
    std::size_t filled = 0;
    for (double v : e.partial().values) filled += !std::isnan(v);
    CHECK(filled <= 3);
  }
}

TEST_CASE("shapley result json round-trip and validation") {
  TempDir dir;
  const auto data = small_synthetic(4);
  ShapleyResult r;
  r.modality_names = data.modality_names;
  r.oracle = "builtin:t1c-shape";
  r.dataset_fingerprint = dataset_fingerprint(data);
  r.table = CoalitionTable(4);
  for (std::uint32_t c = 0; c < 16; ++c) r.table[c] = (c & 2) ? 1.0 : 0.5;
  r.raw = shapley_from_table(r.table);
  r.normalized = normalize_mi(r.raw);
  write_shapley_result(dir / "phi.json", r);
  const auto back = read_shapley_result(dir / "phi.json");
  CHECK(back.normalized.values == r.normalized.values);
  CHECK(back.raw.values == r.raw.values);
  CHECK(back.table.values == r.table.values);
  CHECK(back.dataset_fingerprint == r.dataset_fingerprint);

  auto doc = to_json(r);
  doc["phi"] = {0, 2, 0, 0};
  CHECK_THROWS_AS(shapley_result_from_json(doc), DataError);
  doc = to_json(r);
  doc["phi"] = {0, 0, 0};
  CHECK_THROWS_AS(shapley_result_from_json(doc), DataError);

  auto other = data;
  other.cases[0].image[0] += 1.0f;
  CHECK(dataset_fingerprint(other) != dataset_fingerprint(data));
}
