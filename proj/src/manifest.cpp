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

#include "msfi/manifest.hpp"

#include <fstream>
#include <cmath>
#include <set>

#include "msfi/npy.hpp"

namespace msfi {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<std::string> default_modality_names(std::size_t count) {
  static const char* kBrats[] = {"T1", "T1C", "T2", "FLAIR"};
  std::vector<std::string> names;
  for (std::size_t m = 0; m < count; ++m) {
    names.push_back(count == 4 ? kBrats[m] : "M" + std::to_string(m));
  }
  return names;
}

std::vector<ModalityId> DatasetManifest::modalities() const {
  std::vector<ModalityId> out;
  for (std::size_t m = 0; m < modality_names.size(); ++m) out.push_back({m, modality_names[m]});
  return out;
}

Shape DatasetManifest::image_shape() const {
  return cases.empty() ? Shape{} : cases.front().image.shape();
}

bool DatasetManifest::all_cases_have_masks() const {
  for (const auto& c : cases) {
    if (!c.masks) return false;
  }
  return true;
}

const Case& DatasetManifest::find(const std::string& case_id) const {
  for (const auto& c : cases) {
    if (c.id == case_id) return c;
  }
  throw DataError("unknown case id '" + case_id + "'");
}

void validate(const DatasetManifest& manifest) {
  if (manifest.version != kManifestVersion) {
    throw DataError("unsupported manifest version " + std::to_string(manifest.version));
  }
  if (manifest.modality_names.empty()) throw DataError("manifest lists no modalities");
  std::set<std::string> names(manifest.modality_names.begin(), manifest.modality_names.end());
  if (names.size() != manifest.modality_names.size()) throw DataError("duplicate modality name");
  if (manifest.num_classes < 1) throw DataError("num_classes must be >= 1");

  std::set<std::string> ids;
  const Shape shape = manifest.image_shape();
  for (const auto& c : manifest.cases) {
    const std::string where = "case '" + c.id + "': ";
    if (c.id.empty()) throw DataError("case with empty id");
    if (!ids.insert(c.id).second) throw DataError("duplicate case id '" + c.id + "'");
    const Shape& s = c.image.shape();
    if (s.size() != 3 && s.size() != 4) {
      throw DataError(where + "image must be M x D1 x D2 [x D3], got " + shape_to_string(s));
    }
    if (s[0] != manifest.modality_names.size()) {
      throw DataError(where + "image has " + std::to_string(s[0]) + " modalities, manifest declares " +
                      std::to_string(manifest.modality_names.size()));
    }
    if (shape_size(s) == 0) throw DataError(where + "empty image");
    if (s != shape) {
      throw DataError(where + "shape mismatch: image " + shape_to_string(s) + " vs dataset " +
                      shape_to_string(shape));
    }
    for (float v : c.image.values()) {
      if (!std::isfinite(v)) throw DataError(where + "image contains a non-finite value");
    }
    if (c.masks && c.masks->shape() != s) {
      throw DataError(where + "shape mismatch: masks " + shape_to_string(c.masks->shape()) +
                      " vs image " + shape_to_string(s));
    }
    if (c.masks) {
      for (auto v : c.masks->values()) {
        if (v > 1) throw DataError(where + "mask values must be 0 or 1");
      }
    }
    if (c.label < 0 || c.label >= manifest.num_classes) {
      throw DataError(where + "label " + std::to_string(c.label) + " outside [0, " +
                      std::to_string(manifest.num_classes) + ")");
    }
    if (c.prediction && (*c.prediction < 0 || *c.prediction >= manifest.num_classes)) {
      throw DataError(where + "prediction outside class range");
    }
  }
}

DatasetManifest load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("missing manifest: " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw DataError("malformed manifest " + path.string() + ": " + e.what());
  }

  DatasetManifest m;
  const fs::path root = path.parent_path();
  try {
    m.version = doc.at("version").get<int>();
    if (m.version != kManifestVersion) {
      throw DataError("unsupported manifest version " + std::to_string(m.version));
    }
    m.modality_names = doc.at("modalities").get<std::vector<std::string>>();
    m.num_classes = doc.at("num_classes").get<int>();
    if (doc.contains("generator")) m.generator = doc["generator"];
    const std::optional<Shape> declared =
        doc.contains("shape") ? std::optional<Shape>(doc["shape"].get<Shape>()) : std::nullopt;

    for (const auto& entry : doc.at("cases")) {
      Case c;
      c.id = entry.at("id").get<std::string>();
      const std::string where = "case '" + c.id + "': ";
      c.label = entry.at("label").get<int>();
      try {
        c.image = read_npy_f32(root / entry.at("image").get<std::string>());
        if (entry.contains("masks") && !entry["masks"].is_null()) {
          c.masks = read_npy_mask(root / entry["masks"].get<std::string>());
        }
      } catch (const DataError& e) {
        throw DataError(where + e.what());
      }
      if (declared && c.image.shape() != *declared) {
        throw DataError(where + "shape mismatch: stored image " + shape_to_string(c.image.shape()) +
                        " vs declared " + shape_to_string(*declared));
      }
      if (entry.contains("prediction") && !entry["prediction"].is_null()) {
        c.prediction = entry["prediction"].get<int>();
      }
      m.cases.push_back(std::move(c));
    }
  } catch (const json::exception& e) {
    throw DataError("malformed manifest " + path.string() + ": " + e.what());
  }
  validate(m);
  return m;
}

void write_manifest(const fs::path& path, const DatasetManifest& manifest) {
  validate(manifest);
  const fs::path root = path.parent_path();
  if (!root.empty()) fs::create_directories(root);

  json doc;
  doc["version"] = manifest.version;
  doc["modalities"] = manifest.modality_names;
  doc["num_classes"] = manifest.num_classes;
  doc["shape"] = manifest.image_shape();
  if (!manifest.generator.is_null()) doc["generator"] = manifest.generator;
  doc["cases"] = json::array();
  for (const auto& c : manifest.cases) {
    json entry;
    entry["id"] = c.id;
    entry["label"] = c.label;
    entry["image"] = c.id + ".image.npy";
    write_npy(root / entry["image"].get<std::string>(), c.image);
    if (c.masks) {
      entry["masks"] = c.id + ".masks.npy";
      write_npy(root / entry["masks"].get<std::string>(), *c.masks);
    }
    if (c.prediction) entry["prediction"] = *c.prediction;
    doc["cases"].push_back(std::move(entry));
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write manifest: " + path.string());
  out << doc.dump(2) << '\n';
}

}  // namespace msfi
