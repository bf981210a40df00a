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

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace msfi {

/// `<case_id>__<method>.npy`
std::string heatmap_filename(const std::string& case_id, const std::string& method);

/// Splits a heatmap file name at its last "__"; nullopt for other files.
std::optional<std::pair<std::string, std::string>> parse_heatmap_filename(const std::string& name);

struct HeatmapEntry {
  std::string case_id;
  std::string method;
  std::string file;  // relative to the heatmap directory
  double seconds = 0.0;
  std::optional<int> prediction;
};

/*
 * index.json beside the heatmaps:
 *   {"version": 1,
 *    "methods": {"<method>": <explainer config>},
 *    "entries": [{"case_id", "method", "file", "seconds", "prediction"}]}
 * Entries are kept sorted by (method, case_id).
 */
struct HeatmapIndex {
  std::map<std::string, nlohmann::json> methods;
  std::vector<HeatmapEntry> entries;

  void upsert(HeatmapEntry entry);
  const HeatmapEntry* find(const std::string& case_id, const std::string& method) const;
  std::vector<std::string> method_names() const;
};

inline constexpr const char* kHeatmapIndexName = "index.json";

nlohmann::json to_json(const HeatmapIndex& index);
HeatmapIndex heatmap_index_from_json(const nlohmann::json& doc);

void write_heatmap_index(const std::filesystem::path& dir, const HeatmapIndex& index);

/// Reads index.json when present, otherwise builds an index from the
/// `<case>__<method>.npy` files found in `dir` (no timing or predictions).
HeatmapIndex load_heatmap_index(const std::filesystem::path& dir);

}  // namespace msfi
