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

#include <fstream>
#include <sstream>

#include "doctest.h"
#include "msfi/cli.hpp"
#include "msfi/heatmap_store.hpp"
#include "msfi/metrics.hpp"
#include "msfi/shapley.hpp"
#include "support.hpp"

using namespace msfi;
using msfi::testing::TempDir;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

// Small dataset shared by the pipeline tests.
struct Pipeline {
  TempDir dir;
  std::string data, phi, heatmaps;
  Pipeline() {
    data = (dir / "data" / "manifest.json").string();
    phi = (dir / "phi.json").string();
    heatmaps = (dir / "hm").string();
    REQUIRE(run({"synth", "--n", "10", "--seed", "7", "--size", "32", "--out", (dir / "data").string()}).code == 0);
    REQUIRE(run({"shapley", "--dataset", data, "--out", phi}).code == 0);
  }
};

}  // namespace

TEST_CASE("usage errors exit 1") {
  TempDir dir;
  CHECK(run({}).code == 1);
  CHECK(run({"frobnicate"}).code == 1);
  CHECK(run({"synth", "--n", "7", "--out", dir.path().string()}).code == 1);
  CHECK(run({"synth", "--n", "abc", "--out", dir.path().string()}).code == 1);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("synth writes manifests and probes") {
  TempDir dir;
  const auto r = run({"synth", "--n", "4", "--size", "16", "--out", dir.path().string(), "--probes"});
  REQUIRE(r.code == 0);
  CHECK(run({"synth", "--n", "4", "--size", "16", "--out", (dir / "main").string()}).code == 0);
  CHECK(load_manifest(dir / "main" / "manifest.json").cases.size() == 4);
  CHECK(load_manifest(dir / "probe_t1c" / "manifest.json").cases.size() == 4);
  CHECK(load_manifest(dir / "probe_flair" / "manifest.json").cases.size() == 4);
  CHECK(r.out.find("manifest.json") != std::string::npos);
}

TEST_CASE("shapley: values, cache and data errors") {
  Pipeline p;
  const auto result = read_shapley_result(p.phi);
  CHECK(result.normalized.values == std::vector<double>{0, 1, 0, 0});
  CHECK(result.raw.values[1] == doctest::Approx(0.5));

  const auto cache = (p.dir / "cache.json").string();
  const auto first = run({"shapley", "--dataset", p.data, "--out", p.phi, "--cache", cache});
  REQUIRE(first.code == 0);
  CHECK(first.out.find("cache hit") == std::string::npos);
  const auto before = slurp(p.phi);
  const auto again = run({"shapley", "--dataset", p.data, "--out", p.phi, "--cache", cache});
  CHECK(again.code == 0);
  CHECK(again.out.find("cache hit") != std::string::npos);
  CHECK(slurp(p.phi) == before);

  CHECK(run({"shapley", "--dataset", (p.dir / "nope.json").string(), "--out", p.phi}).code == 2);
  CHECK(run({"shapley", "--dataset", p.data, "--ablation", "sideways", "--out", p.phi}).code == 1);

  // Feature-region ablation on a maskless dataset.
  auto doc = nlohmann::json::parse(slurp(p.data));
  for (auto& c : doc["cases"]) c.erase("masks");
  std::ofstream(p.dir / "data" / "nomask.json") << doc.dump();
  CHECK(run({"shapley", "--dataset", (p.dir / "data" / "nomask.json").string(), "--ablation", "feature-region",
             "--out", (p.dir / "f.json").string()})
            .code == 2);
}

TEST_CASE("oracle failures exit 3") {
  Pipeline p;
  CHECK(run({"shapley", "--dataset", p.data, "--oracle", "exec:true", "--out", (p.dir / "x.json").string()}).code ==
        3);
}

TEST_CASE("explain, eval, ablate, report") {
  Pipeline p;
  const auto ex = run({"explain", "--dataset", p.data, "--methods", "occlusion,feature_ablation", "--out", p.heatmaps,
                       "--window", "8", "--stride", "8", "--patch", "16"});
  REQUIRE(ex.code == 0);
  const auto idx = load_heatmap_index(p.heatmaps);
  CHECK(idx.entries.size() == 20);
  for (const auto& e : idx.entries) {
    CHECK(std::filesystem::exists(std::filesystem::path(p.heatmaps) / e.file));
    CHECK(e.prediction.has_value());
  }
  CHECK(idx.methods.count("occlusion") == 1);

  const auto bad = run({"explain", "--dataset", p.data, "--methods", "saliency", "--out", p.heatmaps});
  CHECK(bad.code == 1);
  CHECK(bad.err.find("kernel_shap") != std::string::npos);

  // One heatmap goes missing: the row is recorded and the run continues.
  std::filesystem::remove(std::filesystem::path(p.heatmaps) / heatmap_filename("case_0003", "occlusion"));
  const auto csv = (p.dir / "metrics.csv").string();
  REQUIRE(run({"eval", "--dataset", p.data, "--heatmaps", p.heatmaps, "--mi", p.phi, "--out", csv}).code == 0);
  const auto rows = read_metric_csv(csv);
  CHECK(rows.size() == 20);
  int missing = 0;
  for (const auto& r : rows) missing += r.status == RecordStatus::kMissing;
  CHECK(missing == 1);

  // Malformed phi file fails before any metric is written.
  std::ofstream(p.dir / "bad_phi.json") << "{\"phi\": [1, 2]}";
  const auto csv2 = (p.dir / "metrics2.csv").string();
  CHECK(run({"eval", "--dataset", p.data, "--heatmaps", p.heatmaps, "--mi", (p.dir / "bad_phi.json").string(),
             "--out", csv2})
            .code == 2);
  CHECK_FALSE(std::filesystem::exists(csv2));

  const auto abl = (p.dir / "abl").string();
  CHECK(run({"ablate", "--dataset", p.data, "--heatmaps", p.heatmaps, "--step", "0", "--out", abl}).code == 1);
  REQUIRE(run({"ablate", "--dataset", p.data, "--heatmaps", p.heatmaps, "--methods", "feature_ablation", "--step",
               "0.25", "--seeds", "2", "--out", abl})
              .code == 0);
  const auto curves = slurp(std::filesystem::path(abl) / "curves.csv");
  REQUIRE(run({"ablate", "--dataset", p.data, "--heatmaps", p.heatmaps, "--methods", "feature_ablation", "--step",
               "0.25", "--seeds", "2", "--out", abl})
              .code == 0);
  CHECK(slurp(std::filesystem::path(abl) / "curves.csv") == curves);

  const auto rep = run({"report", "--input", csv, "--diffauc", (std::filesystem::path(abl) / "diffauc.csv").string()});
  CHECK(rep.code == 0);
  CHECK(rep.out.find("feature_ablation") != std::string::npos);

  std::ofstream(p.dir / "empty.csv") << "";
  CHECK(run({"report", "--input", (p.dir / "empty.csv").string()}).code == 2);
}

TEST_CASE("fixed seed gives byte-identical heatmaps") {
  Pipeline p;
  for (const std::string out : {"a", "b"}) {
    REQUIRE(run({"explain", "--dataset", p.data, "--methods", "kernel_shap", "--samples", "20", "--patch", "16",
                 "--seed", "4", "--no-timing", "--out", (p.dir / out).string()})
                .code == 0);
  }
  for (const auto& e : std::filesystem::directory_iterator(p.dir / "a")) {
    CHECK(slurp(e.path()) == slurp(p.dir / "b" / e.path().filename().string()));
  }
}

TEST_CASE("config file supplies options and flags override it") {
  TempDir dir;
  std::ofstream(dir / "config.json") << R"({"synth": {"n": 6, "size": 16, "seed": 3}})";
  REQUIRE(run({"--config", (dir / "config.json").string(), "synth", "--out", (dir / "a").string()}).code == 0);
  CHECK(load_manifest(dir / "a" / "manifest.json").cases.size() == 6);
  REQUIRE(run({"--config", (dir / "config.json").string(), "synth", "--n", "4", "--out", (dir / "b").string()})
              .code == 0);
  CHECK(load_manifest(dir / "b" / "manifest.json").cases.size() == 4);
}
