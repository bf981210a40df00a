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

#include "msfi/heatmap_store.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "msfi/errors.hpp"

namespace msfi {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {
constexpr const char* kSeparator = "__";
constexpr const char* kExtension = ".npy";
}  // namespace

std::string heatmap_filename(const std::string& case_id, const std::string& method) {
  return case_id + kSeparator + method + kExtension;
}

std::optional<std::pair<std::string, std::string>> parse_heatmap_filename(const std::string& name) {
  const std::string ext = kExtension;
  if (name.size() <= ext.size() || name.compare(name.size() - ext.size(), ext.size(), ext) != 0) {
    return std::nullopt;
  }
  const std::string stem = name.substr(0, name.size() - ext.size());
  const auto cut = stem.rfind(kSeparator);
  if (cut == std::string::npos || cut == 0 || cut + 2 >= stem.size()) return std::nullopt;
  return std::make_pair(stem.substr(0, cut), stem.substr(cut + 2));
}

void HeatmapIndex::upsert(HeatmapEntry entry) {
  auto key = [](const HeatmapEntry& e) { return std::tie(e.method, e.case_id); };
  auto it = std::lower_bound(entries.begin(), entries.end(), entry,
                             [&](const HeatmapEntry& a, const HeatmapEntry& b) { return key(a) < key(b); });
  if (it != entries.end() && key(*it) == key(entry)) {
    *it = std::move(entry);
  } else {
    entries.insert(it, std::move(entry));
  }
}

const HeatmapEntry* HeatmapIndex::find(const std::string& case_id, const std::string& method) const {
  for (const auto& e : entries) {
    if (e.case_id == case_id && e.method == method) return &e;
  }
  return nullptr;
}

std::vector<std::string> HeatmapIndex::method_names() const {
  std::set<std::string> names;
  for (const auto& [name, config] : methods) names.insert(name);
  for (const auto& e : entries) names.insert(e.method);
  return {names.begin(), names.end()};
}

json to_json(const HeatmapIndex& index) {
  json doc;
  doc["version"] = 1;
  doc["methods"] = json::object();
  for (const auto& [name, config] : index.methods) doc["methods"][name] = config;
  doc["entries"] = json::array();
  for (const auto& e : index.entries) {
    json row{{"case_id", e.case_id}, {"method", e.method}, {"file", e.file}, {"seconds", e.seconds}};
    row["prediction"] = e.prediction ? json(*e.prediction) : json(nullptr);
    doc["entries"].push_back(std::move(row));
  }
  return doc;
}

HeatmapIndex heatmap_index_from_json(const json& doc) {
  try {
    HeatmapIndex index;
    if (doc.contains("methods")) {
      for (const auto& [name, config] : doc.at("methods").items()) index.methods[name] = config;
    }
    for (const auto& row : doc.at("entries")) {
      HeatmapEntry e;
      e.case_id = row.at("case_id").get<std::string>();
      e.method = row.at("method").get<std::string>();
      e.file = row.value("file", heatmap_filename(e.case_id, e.method));
      e.seconds = row.value("seconds", 0.0);
      if (row.contains("prediction") && !row.at("prediction").is_null()) {
        e.prediction = row.at("prediction").get<int>();
      }
      index.upsert(std::move(e));
    }
    return index;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed heatmap index: ") + e.what());
  }
}

void write_heatmap_index(const fs::path& dir, const HeatmapIndex& index) {
  fs::create_directories(dir);
  std::ofstream out(dir / kHeatmapIndexName, std::ios::trunc);
  if (!out) throw DataError("cannot write " + (dir / kHeatmapIndexName).string());
  out << to_json(index).dump(2) << '\n';
}

HeatmapIndex load_heatmap_index(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError("heatmap directory not found: " + dir.string());
  const auto path = dir / kHeatmapIndexName;
  if (fs::exists(path)) {
    std::ifstream in(path);
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::exception& e) {
      throw DataError("malformed heatmap index " + path.string() + ": " + e.what());
    }
    return heatmap_index_from_json(doc);
  }
  HeatmapIndex index;
  for (const auto& item : fs::directory_iterator(dir)) {
    if (!item.is_regular_file()) continue;
    const auto name = item.path().filename().string();
    if (auto parsed = parse_heatmap_filename(name)) {
      index.upsert(HeatmapEntry{parsed->first, parsed->second, name, 0.0, std::nullopt});
    }
  }
  return index;
}

}  // namespace msfi
