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
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "msfi/tensor.hpp"

namespace msfi {

inline constexpr int kManifestVersion = 1;

struct ModalityId {
  std::size_t index = 0;
  std::string name;
};

struct Case {
  std::string id;
  Image image;
  int label = 0;
  std::optional<MaskSet> masks;
  std::optional<int> prediction;

  std::optional<bool> correct() const {
    if (!prediction) return std::nullopt;
    return *prediction == label;
  }
};

struct DatasetManifest {
  int version = kManifestVersion;
  std::vector<std::string> modality_names;
  int num_classes = 2;
  std::vector<Case> cases;
  /// Free-form provenance (generator parameters, intensity constants).
  nlohmann::json generator;

  std::vector<ModalityId> modalities() const;
  /// Shape shared by every case image; empty when there are no cases.
  Shape image_shape() const;
  bool all_cases_have_masks() const;
  const Case& find(const std::string& case_id) const;
};

/// Checks every invariant of the data model; throws DataError naming the
/// offending case.
void validate(const DatasetManifest& manifest);

/// Loads and fully validates a manifest and all arrays it references.
/// Array paths are resolved relative to the manifest's directory.
DatasetManifest load_manifest(const std::filesystem::path& path);

/// Writes `path` plus one image (and mask) NPY file per case beside it.
void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);

std::vector<std::string> default_modality_names(std::size_t count);

}  // namespace msfi
