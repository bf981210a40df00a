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

#include "msfi/shapley.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>

#include "msfi/parallel.hpp"

namespace msfi {

using nlohmann::json;

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

std::string to_string(AblationMode mode) {
  return mode == AblationMode::kWholeModality ? "whole_modality" : "feature_region";
}

AblationMode parse_ablation_mode(const std::string& text) {
  if (text == "whole_modality" || text == "whole-modality" || text == "mod") {
    return AblationMode::kWholeModality;
  }
  if (text == "feature_region" || text == "feature-region" || text == "feat") {
    return AblationMode::kFeatureRegion;
  }
  throw UsageError("unknown ablation mode '" + text + "' (expected whole-modality or feature-region)");
}

CoalitionTable::CoalitionTable(std::size_t m) : modalities(m) {
  if (m == 0 || m > kMaxShapleyModalities) {
    throw DataError("coalition tables support 1.." + std::to_string(kMaxShapleyModalities) +
                    " modalities, got " + std::to_string(m));
  }
  values.assign(std::size_t{1} << m, kNaN);
}

bool CoalitionTable::complete() const {
  if (modalities == 0 || values.size() != (std::size_t{1} << modalities)) return false;
  for (double v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

Image ablate_coalition(const Case& c, std::uint32_t coalition, AblationMode mode) {
  Image out = c.image;
  if (mode == AblationMode::kFeatureRegion && !c.masks) {
    throw DataError("case '" + c.id + "': feature-region ablation needs masks");
  }
  for (std::size_t m = 0; m < out.modalities(); ++m) {
    if (coalition & (std::uint32_t{1} << m)) continue;
    auto slice = out.modality(m);
    if (mode == AblationMode::kWholeModality) {
      std::fill(slice.begin(), slice.end(), 0.0f);
    } else {
      const auto mask = c.masks->modality(m);
      for (std::size_t i = 0; i < slice.size(); ++i) {
        if (mask[i] > 0) slice[i] = 0.0f;
      }
    }
  }
  return out;
}

CoalitionTable characteristic_values(Oracle& oracle, const DatasetManifest& dataset,
                                     AblationMode mode) {
  if (dataset.cases.empty()) throw DataError("cannot evaluate coalitions on an empty dataset");
  if (mode == AblationMode::kFeatureRegion) {
    for (const auto& c : dataset.cases) {
      if (!c.masks) throw DataError("case '" + c.id + "': feature-region ablation needs masks");
    }
  }
  CoalitionTable table(dataset.modality_names.size());
  const std::size_t n = dataset.cases.size();
  std::mutex error_mutex;
  std::string first_error;

  parallel_for(table.values.size(), [&](std::size_t coalition) {
    try {
      const auto predicted = predict_classes(oracle, n, [&](std::size_t i) {
        return ablate_coalition(dataset.cases[i], static_cast<std::uint32_t>(coalition), mode);
      });
      std::size_t hits = 0;
      for (std::size_t i = 0; i < n; ++i) hits += predicted[i] == dataset.cases[i].label;
      table.values[coalition] = static_cast<double>(hits) / static_cast<double>(n);
    } catch (const OracleError& e) {
      std::lock_guard lock(error_mutex);
      if (first_error.empty()) first_error = e.what();
    }
  });
  if (!first_error.empty()) {
    throw PartialTableError("coalition table incomplete: " + first_error, std::move(table));
  }
  return table;
}

MiVector shapley_from_table(const CoalitionTable& table) {
  if (!table.complete()) throw DataError("Shapley values need a complete coalition table");
  const std::size_t M = table.modalities;
  // weight(s) = s! (M - s - 1)! / M! = 1 / (M * C(M - 1, s))
  std::vector<double> weight(M);
  double binom = 1.0;
  for (std::size_t s = 0; s < M; ++s) {
    weight[s] = 1.0 / (static_cast<double>(M) * binom);
    binom = binom * static_cast<double>(M - 1 - s) / static_cast<double>(s + 1);
  }
  MiVector phi{std::vector<double>(M, 0.0), false};
  for (std::size_t m = 0; m < M; ++m) {
    const std::uint32_t bit = std::uint32_t{1} << m;
    double acc = 0.0;
    for (std::uint32_t c = 0; c <= table.full(); ++c) {
      if (c & bit) continue;
      const auto size = static_cast<std::size_t>(std::popcount(c));
      acc += weight[size] * (table[c | bit] - table[c]);
    }
    phi.values[m] = acc;
  }
  return phi;
}

MiVector normalize_mi(const MiVector& phi) {
  double peak = 0.0;
  for (double v : phi.values) peak = std::max(peak, v);
  if (!(peak > 0.0)) throw UndefinedError("cannot normalize MI: no positive value");
  MiVector out{phi.values, true};
  for (double& v : out.values) v = std::max(v, 0.0) / peak;
  return out;
}

double accuracy(Oracle& oracle, const DatasetManifest& dataset) {
  if (dataset.cases.empty()) throw DataError("accuracy of an empty dataset is undefined");
  const auto predicted = predict_classes(oracle, dataset.cases.size(),
                                         [&](std::size_t i) { return dataset.cases[i].image; });
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) hits += predicted[i] == dataset.cases[i].label;
  return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

ProbeAccuracy probe_mi(Oracle& oracle, const DatasetManifest& probe_t1c,
                       const DatasetManifest& probe_flair) {
  return {accuracy(oracle, probe_t1c), accuracy(oracle, probe_flair)};
}

std::string dataset_fingerprint(const DatasetManifest& dataset) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= p[i];
      h *= 1099511628211ULL;
    }
  };
  for (const auto& c : dataset.cases) {
    mix(c.id.data(), c.id.size());
    mix(&c.label, sizeof c.label);
    mix(c.image.values().data(), c.image.size() * sizeof(float));
    if (c.masks) mix(c.masks->values().data(), c.masks->size());
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::to_string(dataset.cases.size()) + "-" + buf;
}

json to_json(const ShapleyResult& r) {
  json doc;
  doc["modalities"] = r.modality_names;
  doc["ablation"] = to_string(r.mode);
  doc["oracle"] = r.oracle;
  doc["dataset"] = r.dataset_fingerprint;
  doc["table"] = r.table.values;
  doc["phi_raw"] = r.raw.values;
  doc["phi"] = r.normalized.values;
  return doc;
}

ShapleyResult shapley_result_from_json(const json& doc) {
  try {
    ShapleyResult r;
    r.modality_names = doc.at("modalities").get<std::vector<std::string>>();
    r.mode = parse_ablation_mode(doc.at("ablation").get<std::string>());
    r.oracle = doc.value("oracle", std::string());
    r.dataset_fingerprint = doc.value("dataset", std::string());
    const std::size_t m = r.modality_names.size();
    r.table = CoalitionTable(m);
    const auto table = doc.at("table").get<std::vector<double>>();
    if (table.size() != r.table.values.size()) throw DataError("coalition table has the wrong size");
    r.table.values = table;
    r.raw = MiVector{doc.at("phi_raw").get<std::vector<double>>(), false};
    r.normalized = MiVector{doc.at("phi").get<std::vector<double>>(), true};
    if (r.raw.values.size() != m || r.normalized.values.size() != m) {
      throw DataError("MI vector length does not match the modality list");
    }
    double sum = 0.0;
    for (double v : r.normalized.values) {
      if (!std::isfinite(v) || v < 0.0 || v > 1.0) throw DataError("normalized MI outside [0, 1]");
      sum += v;
    }
    if (!(sum > 0.0)) throw DataError("normalized MI is all zero");
    return r;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed MI document: ") + e.what());
  } catch (const UsageError& e) {
    throw DataError(std::string("malformed MI document: ") + e.what());
  }
}

ShapleyResult read_shapley_result(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("missing MI file: " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw DataError("malformed MI file " + path.string() + ": " + e.what());
  }
  return shapley_result_from_json(doc);
}

void write_shapley_result(const std::filesystem::path& path, const ShapleyResult& result) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << to_json(result).dump(2) << '\n';
}

}  // namespace msfi
