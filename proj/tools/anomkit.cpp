#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "anomkit/errors.hpp"
#include "anomkit/json_io.hpp"
#include "anomkit/pipeline.hpp"
#include "anomkit/version.hpp"

namespace {

using anomkit::pipeline::default_master_seed;

anomkit::HeightUnit parse_height_unit(const std::string& s) {
  if (s == "auto") return anomkit::HeightUnit::Auto;
  if (s == "m") return anomkit::HeightUnit::Meters;
  if (s == "cm") return anomkit::HeightUnit::Centimeters;
  throw anomkit::ConfigError("height unit must be auto, m or cm");
}

nlohmann::json parse_config_arg(const std::string& inline_json,
                                const std::string& file_path) {
  if (!inline_json.empty()) return nlohmann::json::parse(inline_json);
  if (!file_path.empty()) {
    return nlohmann::json::parse(anomkit::read_text_file(file_path));
  }
  return nlohmann::json::object();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"anomkit: unsupervised anomaly detection toolkit for tabular data"};
  app.set_version_flag("--version", anomkit::kVersion);
  app.require_subcommand(1);

  // ---- preprocess ----
  auto* prep = app.add_subcommand(
      "preprocess", "Clean a CSV: drop incomplete rows, derive BMI, one-hot "
                    "encode, optionally standardize");
  anomkit::pipeline::PreprocessOptions prep_opts;
  std::string height_unit = "auto";
  prep->add_option("--in", prep_opts.input_csv, "input CSV")->required();
  prep->add_option("--schema", prep_opts.schema_path, "schema JSON")->required();
  prep->add_option("--out", prep_opts.output_csv, "output CSV")->required();
  prep->add_option("--report", prep_opts.report_path, "prep report JSON path");
  prep->add_option("--out-schema", prep_opts.output_schema_path,
                   "schema for the output CSV (default: <out>.schema.json)");
  prep->add_option("--bmi-weight", prep_opts.bmi_weight_col,
                   "weight column for BMI derivation");
  prep->add_option("--bmi-height", prep_opts.bmi_height_col,
                   "height column for BMI derivation");
  prep->add_option("--height-unit", height_unit, "auto|m|cm (default auto)");
  prep->add_flag("--scale", prep_opts.scale, "standardize continuous columns");
  bool no_encode = false;
  prep->add_flag("--no-encode", no_encode, "skip one-hot encoding");

  // ---- inject ----
  auto* inject = app.add_subcommand(
      "inject", "Append the four graded synthetic anomalies");
  anomkit::pipeline::InjectOptions inj_opts;
  inject->add_option("--in", inj_opts.input_csv, "input CSV")->required();
  inject->add_option("--schema", inj_opts.schema_path, "schema JSON")->required();
  inject->add_option("--seed", inj_opts.seed, "generator seed");
  inject->add_option("--spec", inj_opts.spec_path,
                     "explicit anomaly spec JSON (exactly 4 rows)");
  inject->add_option("--out", inj_opts.output_csv, "augmented CSV")->required();
  inject->add_option("--records", inj_opts.records_path,
                     "write injection records JSON here");

  // ---- detect ----
  auto* detect = app.add_subcommand("detect", "Run one detector, write result.json");
  anomkit::pipeline::DetectOptions det_opts;
  std::string det_config_inline, det_config_file;
  detect->add_option("--in", det_opts.input_csv, "input CSV (clean, numeric)")
      ->required();
  detect->add_option("--schema", det_opts.schema_path, "schema JSON")->required();
  detect
      ->add_option("--method", det_opts.method,
                   "nn|kmeans|dbscan|hdbscan|ocsvm|iforest|ae|vae|ae-ensemble|"
                   "vae-ensemble")
      ->required();
  detect->add_option("--config", det_config_inline, "method config JSON string");
  detect->add_option("--config-file", det_config_file, "method config JSON file");
  detect->add_option("--seed", det_opts.seed, "method seed");
  detect->add_option("--out", det_opts.output_path, "result JSON path")->required();
  detect->add_option("--timeout", det_opts.timeout_seconds,
                     "time budget in seconds (0 = unlimited)");

  // ---- tune ----
  auto* tune = app.add_subcommand(
      "tune", "Grid-search kmeans, dbscan or iforest; write the tuning trace");
  anomkit::pipeline::TuneOptions tune_opts;
  std::string tune_config_inline, tune_config_file;
  tune->add_option("--in", tune_opts.input_csv, "input CSV")->required();
  tune->add_option("--schema", tune_opts.schema_path, "schema JSON")->required();
  tune->add_option("--method", tune_opts.method, "kmeans|dbscan|iforest")
      ->required();
  tune->add_option("--config", tune_config_inline, "grid config JSON string");
  tune->add_option("--config-file", tune_config_file, "grid config JSON file");
  tune->add_option("--seed", tune_opts.seed, "master seed");
  tune->add_option("--out", tune_opts.output_path, "trace JSON path")->required();

  // ---- benchmark ----
  auto* bench = app.add_subcommand(
      "benchmark",
      "Inject anomalies, run the requested methods, emit JSON/Markdown/SVG");
  anomkit::pipeline::BenchmarkOptions bench_opts;
  std::string methods_csv, bench_configs_inline, bench_configs_file;
  std::string preset_name, presets_file = "presets/presets.json";
  bool seed_given = false, inject_seed_given = false;
  bench->add_option("--in", bench_opts.input_csv, "input CSV (clean, numeric)")
      ->required();
  bench->add_option("--schema", bench_opts.schema_path, "schema JSON")->required();
  bench->add_option("--methods", methods_csv,
                    "comma-separated method list (default: all)");
  bench->add_option("--seed", bench_opts.master_seed, "master seed")
      ->each([&](const std::string&) { seed_given = true; });
  bench->add_option("--inject-seed", bench_opts.inject_seed, "injection seed")
      ->each([&](const std::string&) { inject_seed_given = true; });
  bench->add_option("--inject-spec", bench_opts.injection_spec_path,
                    "explicit anomaly spec JSON");
  bench->add_option("--out", bench_opts.out_dir, "output directory")->required();
  bench->add_option("--timeout", bench_opts.timeout_seconds,
                    "per-method budget in seconds (default 600)");
  bench->add_option("--configs", bench_configs_inline,
                    "per-method config overrides, JSON string");
  bench->add_option("--configs-file", bench_configs_file,
                    "per-method config overrides, JSON file");
  bench->add_option("--preset", preset_name,
                    "named preset (e.g. paper-ds1, paper-ds2)");
  bench->add_option("--presets-file", presets_file,
                    "presets JSON file (default presets/presets.json)");
  bench->add_flag("--parallel", bench_opts.parallel,
                  "run methods concurrently; runtimes become non-comparable");
  bench->add_option("--name", bench_opts.dataset_name, "dataset display name");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*prep) {
      prep_opts.height_unit = parse_height_unit(height_unit);
      prep_opts.encode = !no_encode;
      if (prep_opts.report_path.empty()) {
        prep_opts.report_path = prep_opts.output_csv + ".prep-report.json";
      }
      auto summary = anomkit::pipeline::run_preprocess(prep_opts);
      std::cout << "rows: " << summary.n_rows << ", columns: " << summary.n_cols
                << ", dropped: " << summary.dropped_rows << "\n";
      std::cout << "wrote " << prep_opts.output_csv << " and "
                << prep_opts.report_path << "\n";
    } else if (*inject) {
      auto records = anomkit::pipeline::run_inject(inj_opts);
      std::cout << "appended " << records.size() << " anomalies to "
                << inj_opts.output_csv << "\n";
      for (const auto& rec : records) {
        std::cout << "  " << rec.assigned_id << " (" << to_string(rec.grade)
                  << ")\n";
      }
    } else if (*detect) {
      det_opts.config = parse_config_arg(det_config_inline, det_config_file);
      auto outcome = anomkit::pipeline::run_detect(det_opts);
      std::cout << det_opts.method << ": flagged "
                << outcome.run.result.flagged_count() << " of "
                << outcome.run.result.scores.size() << " rows in "
                << outcome.run.result.runtime_seconds << "s\n";
    } else if (*tune) {
      tune_opts.config = parse_config_arg(tune_config_inline, tune_config_file);
      auto trace = anomkit::pipeline::run_tune(tune_opts);
      std::cout << "best config: " << trace["best"].dump() << "\n";
    } else if (*bench) {
      if (!seed_given) bench_opts.master_seed = default_master_seed();
      if (!inject_seed_given) bench_opts.inject_seed = bench_opts.master_seed;
      if (!methods_csv.empty()) {
        std::string item;
        for (char c : methods_csv + ",") {
          if (c == ',') {
            if (!item.empty()) bench_opts.methods.push_back(item);
            item.clear();
          } else {
            item += c;
          }
        }
      }
      bench_opts.method_configs =
          parse_config_arg(bench_configs_inline, bench_configs_file);
      if (!preset_name.empty()) {
        auto presets = anomkit::pipeline::load_presets(presets_file);
        auto preset = anomkit::pipeline::preset_configs(presets, preset_name);
        // explicit --configs beat the preset per method
        for (auto it = preset.begin(); it != preset.end(); ++it) {
          if (!bench_opts.method_configs.contains(it.key())) {
            bench_opts.method_configs[it.key()] = it.value();
          }
        }
      }
      auto rep = anomkit::pipeline::run_benchmark(bench_opts);
      for (const auto& m : rep.methods) {
        std::cout << m.method << ": " << m.status;
        if (m.status == "ok") {
          std::cout << ", flagged " << m.metrics.total_flagged << " ("
                    << m.metrics.injected_found << "/4 injected), "
                    << m.metrics.runtime_seconds << "s";
        }
        std::cout << "\n";
      }
      std::cout << "report written to " << bench_opts.out_dir << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
