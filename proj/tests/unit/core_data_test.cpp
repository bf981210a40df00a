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

#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "msfi/errors.hpp"
#include "msfi/manifest.hpp"
#include "msfi/npy.hpp"
#include "support.hpp"

using namespace msfi;
using msfi::testing::TempDir;

namespace {

DatasetManifest two_cases() {
  DatasetManifest m;
  m.modality_names = default_modality_names(4);
  for (int i = 0; i < 2; ++i) {
    Case c;
    c.id = "case_" + std::to_string(i);
    c.label = i;
    c.image = msfi::testing::random_image({4, 32, 32}, 10 + i);
    MaskSet mask({4, 32, 32});
    mask[5] = 1;
    c.masks = mask;
    m.cases.push_back(std::move(c));
  }
  return m;
}

}  // namespace

TEST_CASE("npy round-trips bit-exactly") {
  TempDir dir;
  Tensor<float> zeros({4, 8, 8});
  write_npy(dir / "z.npy", zeros);
  CHECK(read_npy_f32(dir / "z.npy") == zeros);

  Tensor<float> tenth({3}, std::vector<float>{0.1f, -0.0f, 1e-30f});
  write_npy(dir / "t.npy", tenth);
  const auto back = read_npy_f32(dir / "t.npy");
  CHECK(back.shape() == Shape{3});
  CHECK(std::memcmp(back.values().data(), tenth.values().data(), 3 * sizeof(float)) == 0);

  Tensor<double> d({2, 2}, std::vector<double>{0.1, 0.2, 0.3, 1.0 / 3.0});
  write_npy(dir / "d.npy", d);
  CHECK(read_npy_f64(dir / "d.npy") == d);

  MaskSet mask({1, 2, 3}, std::vector<std::uint8_t>{0, 1, 1, 0, 0, 1});
  write_npy(dir / "m.npy", mask);
  CHECK(read_npy_mask(dir / "m.npy") == mask);
}

TEST_CASE("npy header is 64-byte aligned and C-order") {
  TempDir dir;
  write_npy(dir / "a.npy", Tensor<float>({2, 3}));
  std::ifstream in(dir / "a.npy", std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(bytes.substr(0, 6) == "\x93NUMPY");
  CHECK(bytes[6] == 1);
  const auto h = parse_npy_header(bytes);
  CHECK(h.payload_offset % 64 == 0);
  CHECK(h.shape == Shape{2, 3});
  CHECK(h.dtype == NpyDtype::kFloat32);
  CHECK(bytes.find("'fortran_order': False") != std::string::npos);
}

TEST_CASE("truncated or corrupt npy is a data error") {
  TempDir dir;
  write_npy(dir / "a.npy", Tensor<float>({4, 8, 8}));
  std::filesystem::resize_file(dir / "a.npy", std::filesystem::file_size(dir / "a.npy") - 10);
  CHECK_THROWS_AS(read_npy_f32(dir / "a.npy"), DataError);
  {
    std::ofstream out(dir / "junk.npy");
    out << "not an array";
  }
  CHECK_THROWS_AS(read_npy_f32(dir / "junk.npy"), DataError);
  CHECK_THROWS_AS(read_npy_f32(dir / "missing.npy"), DataError);
}

TEST_CASE("mask files reject values outside {0,1}") {
  TempDir dir;
  write_npy(dir / "m.npy", MaskSet({2}, std::vector<std::uint8_t>{0, 2}));
  CHECK_THROWS_AS(read_npy_mask(dir / "m.npy"), DataError);
}

TEST_CASE("manifest round-trip") {
  TempDir dir;
  const auto m = two_cases();
  write_manifest(dir / "manifest.json", m);
  const auto back = load_manifest(dir / "manifest.json");
  REQUIRE(back.cases.size() == 2);
  CHECK(back.image_shape() == Shape{4, 32, 32});
  CHECK(back.modality_names == m.modality_names);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(back.cases[i].id == m.cases[i].id);
    CHECK(back.cases[i].label == m.cases[i].label);
    CHECK(back.cases[i].image == m.cases[i].image);
    CHECK(*back.cases[i].masks == *m.cases[i].masks);
  }
}

TEST_CASE("manifest mask shape mismatch names the case") {
  TempDir dir;
  write_manifest(dir / "manifest.json", two_cases());
  // Overwrite one mask file with a 3-modality array.
  std::string mask_file;
  for (const auto& e : std::filesystem::directory_iterator(dir.path())) {
    const auto name = e.path().filename().string();
    if (name.find("case_1") != std::string::npos && name.find("mask") != std::string::npos) mask_file = name;
  }
  REQUIRE(!mask_file.empty());
  write_npy(dir / mask_file, MaskSet({3, 32, 32}));
  try {
    load_manifest(dir / "manifest.json");
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("case_1") != std::string::npos);
  }
}

TEST_CASE("manifest referencing a missing file is a data error") {
  TempDir dir;
  write_manifest(dir / "manifest.json", two_cases());
  for (const auto& e : std::filesystem::directory_iterator(dir.path())) {
    if (e.path().filename().string().find("case_0") != std::string::npos) {
      std::filesystem::remove(e.path());
      break;
    }
  }
  CHECK_THROWS_AS(load_manifest(dir / "manifest.json"), DataError);
  CHECK_THROWS_AS(load_manifest(dir / "nope.json"), DataError);
}

TEST_CASE("validate rejects duplicate ids, bad labels and non-finite images") {
  auto m = two_cases();
  m.cases[1].id = m.cases[0].id;
  CHECK_THROWS_AS(validate(m), DataError);

  m = two_cases();
  m.cases[0].label = 2;
  CHECK_THROWS_AS(validate(m), DataError);

  m = two_cases();
  m.cases[0].image[3] = std::numeric_limits<float>::quiet_NaN();
  CHECK_THROWS_AS(validate(m), DataError);

  m = two_cases();
  m.cases[1].image = Image({4, 16, 16});
  CHECK_THROWS_AS(validate(m), DataError);

  CHECK_NOTHROW(validate(two_cases()));
}
