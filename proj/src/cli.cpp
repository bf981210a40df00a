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

#include "msfi/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "msfi/ablation.hpp"
#include "msfi/explainers.hpp"
#include "msfi/heatmap_store.hpp"
#include "msfi/manifest.hpp"
#include "msfi/metrics.hpp"
#include "msfi/npy.hpp"
#include "msfi/oracle.hpp"
#include "msfi/parallel.hpp"
#include "msfi/postproc.hpp"
#include "msfi/report.hpp"
#include "msfi/shapley.hpp"
#include "msfi/synthgen.hpp"

namespace msfi::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr const char* kDefaultOracle = "builtin:t1c-shape";

// JSON config files: top-level keys are global options, nested objects hold
// the options of the subcommand with that name.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App*, bool, bool, std::string) const override { return "{}"; }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    json doc;
    try {
      doc = json::parse(input);
    } catch (const json::exception& e) {
      throw CLI::ConversionError(std::string("config file is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw CLI::ConversionError("config file must hold a JSON object");
    std::vector<CLI::ConfigItem> items;
    collect(doc, {}, items);
    return items;
  }

 private:
  static std::string scalar(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number()) return v.dump();
    throw CLI::ConversionError("unsupported config value " + v.dump());
  }

  static void collect(const json& obj, const std::vector<std::string>& parents,
                      std::vector<CLI::ConfigItem>& items) {
    for (const auto& [key, value] : obj.items()) {
      if (value.is_object()) {
        auto nested = parents;
        nested.push_back(key);
        collect(value, nested, items);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      if (value.is_array()) {
        for (const auto& v : value) item.inputs.push_back(scalar(v));
      } else {
        item.inputs.push_back(scalar(value));
      }
      items.push_back(std::move(item));
    }
  }
};

struct Streams {
  std::ostream& out;
  std::ostream& err;
};

std::vector<std::size_t> sorted_case_order(const DatasetManifest& d) {
  std::vector<std::size_t> order(d.cases.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return d.cases[a].id < d.cases[b].id; });
  return order;
}

std::string join(const std::vector<std::string>& items, const std::string& sep = ", ") {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : sep) + s;
  return out;
}

std::string format_phi(const std::vector<std::string>& names, const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    out += (i ? " " : "") + names[i] + "=" + format_number(values[i]);
  }
  return out;
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
  std::size_t n = 200;
  std::uint64_t seed = 0;
  double p_flair = 0.7;
  std::size_t size = 128;
  std::string out;
  bool tumor_only = false;
  bool probes = false;
};

void cmd_synth(const SynthArgs& a, Streams io) {
  if (a.probes) {
    auto [t1c, flair] = synth::generate_probe_sets(a.n, a.seed, a.size);
    const auto p1 = fs::path(a.out) / "probe_t1c" / "manifest.json";
    const auto p2 = fs::path(a.out) / "probe_flair" / "manifest.json";
    write_manifest(p1, t1c);
    write_manifest(p2, flair);
    io.out << p1.string() << '\n' << p2.string() << '\n';
    return;
  }
  synth::Config config;
  config.n = a.n;
  config.seed = a.seed;
  config.p_flair = a.p_flair;
  config.size = a.size;
  config.tumor_only = a.tumor_only;
  const auto path = fs::path(a.out) / "manifest.json";
  write_manifest(path, synth::generate_dataset(config));
  io.out << path.string() << '\n';
}

// ---------------------------------------------------------------- probe

struct ProbeArgs {
  std::string probe_t1c, probe_flair, oracle = kDefaultOracle, out;
};

void cmd_probe(const ProbeArgs& a, Streams io) {
  const auto t1c = load_manifest(a.probe_t1c);
  const auto flair = load_manifest(a.probe_flair);
  if (t1c.image_shape() != flair.image_shape()) throw DataError("probe sets have different shapes");
  auto oracle = make_oracle(a.oracle, t1c.image_shape());
  const auto acc = probe_mi(*oracle, t1c, flair);
  io.out << "acc_t1c=" << format_number(acc.acc_t1c) << " acc_flair=" << format_number(acc.acc_flair)
         << '\n';
  if (!a.out.empty()) {
    std::ofstream f(a.out, std::ios::trunc);
    if (!f) throw DataError("cannot write " + a.out);
    f << json{{"oracle", a.oracle}, {"acc_t1c", acc.acc_t1c}, {"acc_flair", acc.acc_flair}}.dump(2)
      << '\n';
  }
}

// ---------------------------------------------------------------- shapley

struct ShapleyArgs {
  std::string dataset, oracle = kDefaultOracle, ablation = "whole-modality", out, cache;
};

void cmd_shapley(const ShapleyArgs& a, Streams io) {
  const auto mode = parse_ablation_mode(a.ablation);
  const auto dataset = load_manifest(a.dataset);
  if (mode == AblationMode::kFeatureRegion && !dataset.all_cases_have_masks()) {
    throw DataError("feature-region ablation needs masks on every case");
  }
  const auto fingerprint = dataset_fingerprint(dataset);

  ShapleyResult result;
  bool cached = false;
  if (!a.cache.empty() && fs::exists(a.cache)) {
    const auto hit = read_shapley_result(a.cache);
    if (hit.dataset_fingerprint == fingerprint && hit.mode == mode && hit.oracle == a.oracle) {
      result = hit;
      cached = true;
    }
  }
  if (!cached) {
    auto oracle = make_oracle(a.oracle, dataset.image_shape());
    result.modality_names = dataset.modality_names;
    result.mode = mode;
    result.oracle = a.oracle;
    result.dataset_fingerprint = fingerprint;
    try {
      result.table = characteristic_values(*oracle, dataset, mode);
    } catch (const PartialTableError& e) {
      io.err << "partial coalition table:";
      for (std::size_t c = 0; c < e.partial().values.size(); ++c) {
        io.err << ' ' << c << '=' << format_number(e.partial().values[c]);
      }
      io.err << '\n';
      throw;
    }
    result.raw = shapley_from_table(result.table);
    result.normalized = normalize_mi(result.raw);
    if (!a.cache.empty()) write_shapley_result(a.cache, result);
  }
  write_shapley_result(a.out, result);
  io.out << (cached ? "cache hit: " : "") << "phi_raw " << format_phi(result.modality_names, result.raw.values)
         << '\n'
         << "phi " << format_phi(result.modality_names, result.normalized.values) << '\n';
}

// ---------------------------------------------------------------- explain

struct ExplainArgs {
  std::string dataset, oracle = kDefaultOracle, out;
  std::vector<std::string> methods;
  ExplainerConfig config;
  bool no_timing = false;
};

void cmd_explain(ExplainArgs a, Streams io) {
  for (const auto& m : a.methods) {
    if (!is_explainer(m)) {
      throw UsageError("unknown method '" + m + "' (valid: " + join(explainer_names()) + ")");
    }
  }
  const auto dataset = load_manifest(a.dataset);
  auto oracle = make_oracle(a.oracle, dataset.image_shape());
  const fs::path dir = a.out;
  fs::create_directories(dir);
  HeatmapIndex index = fs::exists(dir / kHeatmapIndexName) ? load_heatmap_index(dir) : HeatmapIndex{};

  const std::size_t n = dataset.cases.size();
  const auto predicted = predict_classes(*oracle, n, [&](std::size_t i) { return dataset.cases[i].image; });

  for (const auto& method : a.methods) {
    ExplainerConfig config = a.config;
    config.method = method;
    std::vector<double> seconds;
    const auto heatmaps = explain_dataset(*oracle, dataset, config, &seconds);
    parallel_for(n, [&](std::size_t i) {
      write_heatmap(dir / heatmap_filename(dataset.cases[i].id, method), heatmaps[i]);
    });
    index.methods[method] = to_json(config);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& c = dataset.cases[i];
      index.upsert({c.id, method, heatmap_filename(c.id, method), a.no_timing ? 0.0 : seconds[i],
                    predicted[i]});
    }
    io.out << method << ": " << n << " heatmaps\n";
  }
  write_heatmap_index(dir, index);
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
  std::string dataset, heatmaps, mi, out, rectify = "clip";
  std::vector<std::string> methods;
  std::vector<std::string> metrics{"msfi", "mi", "fp", "iou"};
  double iou_threshold = 0.5;
};

MetricRecord evaluate(const Case& c, const std::string& method, const fs::path& file,
                      const MiVector& truth, RectifyMode mode, double iou_threshold,
                      const std::vector<std::string>& metrics) {
  auto wants = [&](const char* m) { return std::find(metrics.begin(), metrics.end(), m) != metrics.end(); };
  MetricRecord r;
  r.case_id = c.id;
  r.method = method;
  r.label = c.label;
  r.msfi = r.mi_correlation = r.fp = r.iou = kNaN;
  Heatmap raw;
  try {
    raw = read_heatmap(file);
    if (raw.values.shape() != c.image.shape()) {
      throw DataError("heatmap shape " + shape_to_string(raw.values.shape()) + " does not match image");
    }
  } catch (const DataError&) {
    r.status = RecordStatus::kError;
    return r;
  }
  const auto normalized = normalize_joint(rectify(raw, mode));
  const Heatmap& h = normalized.heatmap;
  r.status = normalized.degenerate ? RecordStatus::kDegenerate : RecordStatus::kOk;
  if (wants("mi")) r.mi_correlation = mi_correlation(estimated_mi(h), truth);
  if (c.masks) {
    if (wants("msfi")) r.msfi = msfi(h, *c.masks, truth);
    if (wants("fp")) r.fp = feature_portion(h, *c.masks).value_or(kNaN);
    if (wants("iou")) r.iou = iou(h, *c.masks, iou_threshold);
  }
  return r;
}

void cmd_eval(const EvalArgs& a, Streams io) {
  for (const auto& m : a.metrics) {
    if (m != "msfi" && m != "mi" && m != "fp" && m != "iou") {
      throw UsageError("unknown metric '" + m + "' (valid: msfi, mi, fp, iou)");
    }
  }
  const auto mode = parse_rectify_mode(a.rectify);
  // Fail fast on the ground truth before touching any heatmap.
  const auto truth_doc = read_shapley_result(a.mi);
  const auto dataset = load_manifest(a.dataset);
  if (truth_doc.normalized.values.size() != dataset.modality_names.size()) {
    throw DataError("MI file has " + std::to_string(truth_doc.normalized.values.size()) +
                    " modalities, dataset has " + std::to_string(dataset.modality_names.size()));
  }
  const auto index = load_heatmap_index(a.heatmaps);
  const auto methods = a.methods.empty() ? index.method_names() : a.methods;
  if (methods.empty()) throw DataError("no heatmaps found in " + a.heatmaps);

  const auto order = sorted_case_order(dataset);
  std::vector<MetricRecord> rows(methods.size() * order.size());
  parallel_for(rows.size(), [&](std::size_t j) {
    const auto& method = methods[j / order.size()];
    const auto& c = dataset.cases[order[j % order.size()]];
    const auto* entry = index.find(c.id, method);
    const fs::path file = fs::path(a.heatmaps) / (entry ? entry->file : heatmap_filename(c.id, method));
    MetricRecord r;
    if (!fs::exists(file)) {
      r.case_id = c.id;
      r.method = method;
      r.label = c.label;
      r.status = RecordStatus::kMissing;
      r.msfi = r.mi_correlation = r.fp = r.iou = kNaN;
    } else {
      r = evaluate(c, method, file, truth_doc.normalized, mode, a.iou_threshold, a.metrics);
    }
    r.prediction = entry && entry->prediction ? entry->prediction : c.prediction;
    r.seconds = entry ? entry->seconds : kNaN;
    rows[j] = std::move(r);
  });
  write_metric_csv(a.out, rows);
  std::size_t missing = 0;
  for (const auto& r : rows) missing += r.status == RecordStatus::kMissing;
  io.out << rows.size() << " rows (" << missing << " missing) -> " << a.out << '\n';
}

// ---------------------------------------------------------------- ablate

struct AblateArgs {
  std::string dataset, oracle = kDefaultOracle, heatmaps, out, rectify = "clip";
  std::vector<std::string> methods;
  double step = kDefaultAblationStep;
  int seeds = kDefaultBaselineSeeds;
  std::uint64_t seed = 0;
};

void cmd_ablate(const AblateArgs& a, Streams io) {
  if (!(a.step > 0.0 && a.step <= 0.5)) throw UsageError("--step must lie in (0, 0.5]");
  if (a.seeds < 1) throw UsageError("--seeds must be >= 1");
  const auto mode = parse_rectify_mode(a.rectify);
  const auto dataset = load_manifest(a.dataset);
  const auto index = load_heatmap_index(a.heatmaps);
  const auto methods = a.methods.empty() ? index.method_names() : a.methods;
  auto oracle = make_oracle(a.oracle, dataset.image_shape());

  std::vector<NamedCurve> curves;
  std::vector<AblationCurve> random;
  for (int s = 0; s < a.seeds; ++s) {
    random.push_back(ablation_curve(*oracle, dataset, {}, Ordering::random(a.seed + s), a.step));
    curves.push_back({"random", random.back()});
  }
  double random_auc = 0.0;
  for (const auto& r : random) random_auc += auc(r);
  random_auc /= static_cast<double>(random.size());

  std::vector<DiffAucRow> rows;
  for (const auto& method : methods) {
    std::vector<Heatmap> heatmaps(dataset.cases.size());
    parallel_for(dataset.cases.size(), [&](std::size_t i) {
      const auto& c = dataset.cases[i];
      const auto* entry = index.find(c.id, method);
      const fs::path file = fs::path(a.heatmaps) / (entry ? entry->file : heatmap_filename(c.id, method));
      if (!fs::exists(file)) throw DataError("case '" + c.id + "': no " + method + " heatmap");
      heatmaps[i] = rectify(read_heatmap(file), mode);
    });
    const auto curve = ablation_curve(*oracle, dataset, heatmaps, Ordering::heatmap(), a.step);
    curves.push_back({method, curve});
    rows.push_back({method, auc(curve), random_auc, diff_auc(curve, random), a.seeds});
    io.out << method << ": diffAUC " << format_number(rows.back().diff_auc) << '\n';
  }
  write_curves_csv(fs::path(a.out) / "curves.csv", curves);
  write_diffauc_csv(fs::path(a.out) / "diffauc.csv", rows);
}

// ---------------------------------------------------------------- report

struct ReportArgs {
  std::vector<std::string> inputs;
  std::string diffauc, out;
  bool no_correctness = false;
};

void cmd_report(const ReportArgs& a, Streams io) {
  std::vector<MetricRecord> rows;
  for (const auto& path : a.inputs) {
    auto part = read_metric_csv(path);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  if (rows.empty()) throw DataError("metric CSV input is empty");
  std::vector<DiffAucRow> diff;
  if (!a.diffauc.empty()) diff = read_diffauc_csv(a.diffauc);
  ReportOptions options;
  options.by_correctness = !a.no_correctness;
  const auto text = render_report(rows, diff, options);
  if (a.out.empty()) {
    io.out << text;
    return;
  }
  if (fs::path(a.out).has_parent_path()) fs::create_directories(fs::path(a.out).parent_path());
  std::ofstream f(a.out, std::ios::trunc);
  if (!f) throw DataError("cannot write " + a.out);
  f << text;
  io.out << a.out << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Streams io{out, err};
  CLI::App app{"Evaluation engine for multi-modal feature-attribution heatmaps", "msfi"};
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON config file (flags override it)");
  app.require_subcommand(1);
  int jobs_flag = 0;
  app.add_option("--jobs,-j", jobs_flag, "Worker threads (default: all cores)")->check(CLI::NonNegativeNumber);

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic multi-modal dataset");
  synth->add_option("--n", synth_args.n, "Number of cases (even)");
  synth->add_option("--seed", synth_args.seed, "Random seed");
  synth->add_option("--p-flair", synth_args.p_flair, "Probability that FLAIR matches the label");
  synth->add_option("--size", synth_args.size, "Spatial edge length");
  synth->add_option("--out", synth_args.out, "Output directory")->required();
  synth->add_flag("--tumor-only", synth_args.tumor_only, "Omit the background");
  synth->add_flag("--probes", synth_args.probes, "Write the two tumor-only probe sets instead");

  ProbeArgs probe_args;
  auto* probe = app.add_subcommand("probe", "Oracle accuracy on the T1C and FLAIR probe sets");
  probe->add_option("--probe-t1c", probe_args.probe_t1c, "T1C-aligned probe manifest")->required();
  probe->add_option("--probe-flair", probe_args.probe_flair, "FLAIR-aligned probe manifest")->required();
  probe->add_option("--oracle", probe_args.oracle, "Oracle spec");
  probe->add_option("--out", probe_args.out, "Optional JSON output");

  ShapleyArgs shapley_args;
  auto* shapley = app.add_subcommand("shapley", "Ground-truth modality Shapley values");
  shapley->add_option("--dataset", shapley_args.dataset, "Dataset manifest")->required();
  shapley->add_option("--oracle", shapley_args.oracle, "Oracle spec");
  shapley->add_option("--ablation", shapley_args.ablation, "whole-modality | feature-region");
  shapley->add_option("--out", shapley_args.out, "Output JSON")->required();
  shapley->add_option("--cache", shapley_args.cache, "Cache file reused when dataset, oracle and mode match");

  ExplainArgs explain_args;
  auto& ec = explain_args.config;
  auto* explain = app.add_subcommand("explain", "Generate heatmaps with perturbation explainers");
  explain->add_option("--dataset", explain_args.dataset, "Dataset manifest")->required();
  explain->add_option("--oracle", explain_args.oracle, "Oracle spec");
  explain->add_option("--methods", explain_args.methods, "Comma-separated method names")
      ->delimiter(',')
      ->required();
  explain->add_option("--out", explain_args.out, "Heatmap directory")->required();
  explain->add_option("--window", ec.window, "Occlusion window edge");
  explain->add_option("--stride", ec.stride, "Occlusion stride");
  explain->add_option("--patch", ec.patch, "Grid grouping patch edge");
  explain->add_option("--grouping", ec.grouping, "grid | mask");
  explain->add_option("--samples", ec.samples, "Samples for sampling methods (0 = method default)");
  explain->add_option("--sigma", ec.sigma, "LIME kernel width");
  explain->add_option("--lambda", ec.lambda, "Ridge strength");
  explain->add_option("--baseline", ec.baseline, "Perturbation baseline value");
  explain->add_option("--seed", ec.seed, "Random seed");
  explain->add_flag("--no-timing", explain_args.no_timing, "Record zero seconds (reproducible index)");

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "Score heatmaps against masks and ground-truth MI");
  eval->add_option("--dataset", eval_args.dataset, "Dataset manifest")->required();
  eval->add_option("--heatmaps", eval_args.heatmaps, "Heatmap directory")->required();
  eval->add_option("--mi", eval_args.mi, "Shapley JSON from `msfi shapley`")->required();
  eval->add_option("--methods", eval_args.methods, "Restrict to these methods")->delimiter(',');
  eval->add_option("--metrics", eval_args.metrics, "msfi,mi,fp,iou")->delimiter(',');
  eval->add_option("--rectify", eval_args.rectify, "clip | abs");
  eval->add_option("--iou-threshold", eval_args.iou_threshold, "Binarization fraction of the max");
  eval->add_option("--out", eval_args.out, "Metric CSV")->required();

  AblateArgs ablate_args;
  auto* ablate = app.add_subcommand("ablate", "Ablation curves and diffAUC");
  ablate->add_option("--dataset", ablate_args.dataset, "Dataset manifest")->required();
  ablate->add_option("--oracle", ablate_args.oracle, "Oracle spec");
  ablate->add_option("--heatmaps", ablate_args.heatmaps, "Heatmap directory")->required();
  ablate->add_option("--methods", ablate_args.methods, "Restrict to these methods")->delimiter(',');
  ablate->add_option("--step", ablate_args.step, "Fraction step");
  ablate->add_option("--seeds", ablate_args.seeds, "Random baseline curves");
  ablate->add_option("--seed", ablate_args.seed, "First baseline seed");
  ablate->add_option("--rectify", ablate_args.rectify, "clip | abs");
  ablate->add_option("--out", ablate_args.out, "Output directory")->required();

  ReportArgs report_args;
  auto* report = app.add_subcommand("report", "Markdown summary table");
  report->add_option("--input", report_args.inputs, "Metric CSV(s)")->required()->delimiter(',');
  report->add_option("--diffauc", report_args.diffauc, "diffauc.csv from `msfi ablate`");
  report->add_flag("--no-correctness", report_args.no_correctness, "Skip the correct/incorrect split");
  report->add_option("--out", report_args.out, "Output markdown (stdout when omitted)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }

  if (jobs_flag > 0) set_jobs(jobs_flag);
  int code = 0;
  try {
    if (*synth) cmd_synth(synth_args, io);
    if (*probe) cmd_probe(probe_args, io);
    if (*shapley) cmd_shapley(shapley_args, io);
    if (*explain) cmd_explain(explain_args, io);
    if (*eval) cmd_eval(eval_args, io);
    if (*ablate) cmd_ablate(ablate_args, io);
    if (*report) cmd_report(report_args, io);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    code = 1;
  } catch (const OracleError& e) {
    err << "oracle error: " << e.what() << '\n';
    code = 3;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    code = 2;
  } catch (const fs::filesystem_error& e) {
    err << "data error: " << e.what() << '\n';
    code = 2;
  }
  if (jobs_flag > 0) set_jobs(0);
  return code;
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace msfi::cli
