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

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "msfi/manifest.hpp"
#include "msfi/metrics.hpp"
#include "msfi/oracle.hpp"

namespace msfi {

enum class AblationMode { kWholeModality, kFeatureRegion };

std::string to_string(AblationMode mode);
AblationMode parse_ablation_mode(const std::string& text);

inline constexpr std::size_t kMaxShapleyModalities = 20;

/// v(c) for every modality subset c, indexed by bitmask (bit m set means
/// modality m is kept). Missing entries are NaN.
struct CoalitionTable {
  std::size_t modalities = 0;
  std::vector<double> values;

  CoalitionTable() = default;
  explicit CoalitionTable(std::size_t m);

  double& operator[](std::uint32_t coalition) { return values[coalition]; }
  double operator[](std::uint32_t coalition) const { return values[coalition]; }
  std::uint32_t full() const { return (std::uint32_t{1} << modalities) - 1; }
  bool complete() const;
};

/// Thrown when the oracle fails part-way; carries what was evaluated.
class PartialTableError : public OracleError {
 public:
  PartialTableError(const std::string& what, CoalitionTable partial)
      : OracleError(what), partial_(std::move(partial)) {}
  const CoalitionTable& partial() const { return partial_; }

 private:
  CoalitionTable partial_;
};

/// Copy of the case image with every modality outside `coalition` zeroed
/// (whole-modality mode) or only its masked voxels zeroed (feature-region).
Image ablate_coalition(const Case& c, std::uint32_t coalition, AblationMode mode);

/// v(c) = oracle accuracy over the dataset with modalities outside c ablated.
CoalitionTable characteristic_values(Oracle& oracle, const DatasetManifest& dataset,
                                     AblationMode mode);

/// Exact Shapley value of each modality by full subset enumeration.
MiVector shapley_from_table(const CoalitionTable& table);

/// Clips negatives to 0 and divides by the maximum; UndefinedError when no
/// value is positive.
MiVector normalize_mi(const MiVector& phi);

/// Oracle accuracy on a dataset, unablated.
double accuracy(Oracle& oracle, const DatasetManifest& dataset);

struct ProbeAccuracy {
  double acc_t1c = 0.0;
  double acc_flair = 0.0;
};

/// Accuracies on the two tumor-only probe sets (T1C-aligned, FLAIR-aligned).
ProbeAccuracy probe_mi(Oracle& oracle, const DatasetManifest& probe_t1c,
                       const DatasetManifest& probe_flair);

/// Ground-truth MI document shared between CLI stages.
struct ShapleyResult {
  std::vector<std::string> modality_names;
  AblationMode mode = AblationMode::kWholeModality;
  std::string oracle;
  std::string dataset_fingerprint;
  CoalitionTable table;
  MiVector raw;
  MiVector normalized;
};

/// Identifies a dataset's content for cache validation (case ids, labels,
/// shapes and an FNV-1a hash over image bytes).
std::string dataset_fingerprint(const DatasetManifest& dataset);

nlohmann::json to_json(const ShapleyResult& result);
ShapleyResult shapley_result_from_json(const nlohmann::json& doc);
ShapleyResult read_shapley_result(const std::filesystem::path& path);
void write_shapley_result(const std::filesystem::path& path, const ShapleyResult& result);

}  // namespace msfi
