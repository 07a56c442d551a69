#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "anomkit/dataset.hpp"
#include "anomkit/deadline.hpp"
#include "anomkit/report.hpp"
#include "anomkit/result.hpp"

namespace anomkit::pipeline {

inline constexpr std::uint64_t kDefaultSeed = 42;

// honors the ANOMKIT_SEED environment variable
std::uint64_t default_master_seed();

const std::vector<std::string>& known_methods();

// --- preprocess -------------------------------------------------------------

struct PreprocessOptions {
  std::string input_csv;
  std::string schema_path;
  std::string output_csv;
  std::string report_path;          // empty: derived from output_csv
  std::string output_schema_path;   // empty: output_csv + ".schema.json"
  std::string bmi_weight_col;       // both set: derive BMI
  std::string bmi_height_col;
  HeightUnit height_unit = HeightUnit::Auto;
  bool encode = true;
  bool scale = false;
};

struct PreprocessSummary {
  std::size_t dropped_rows = 0;
  std::size_t n_rows = 0;
  std::size_t n_cols = 0;
  nlohmann::json report;
};

PreprocessSummary run_preprocess(const PreprocessOptions& opts);

// --- detect -----------------------------------------------------------------

struct MethodRun {
  AnomalyResult result;
  nlohmann::json config_used;
  std::optional<double> quality;
};

// Runs one detector on the numeric view. The config is merged over the
// method defaults; a "tune" object engages grid search where supported
// (kmeans, dbscan, iforest). Neural methods standardize internally.
MethodRun run_method(const std::string& method, const Matrix& x,
                     const nlohmann::json& config, std::uint64_t seed,
                     const Deadline& deadline = Deadline::none(),
                     const std::vector<bool>* clean_mask = nullptr);

struct DetectOptions {
  std::string input_csv;
  std::string schema_path;
  std::string method;
  nlohmann::json config = nlohmann::json::object();
  std::uint64_t seed = kDefaultSeed;
  std::string output_path;
  double timeout_seconds = 0.0;  // 0: no budget
};

struct DetectOutcome {
  MethodRun run;
  nlohmann::json result_json;
};

DetectOutcome run_detect(const DetectOptions& opts);
nlohmann::json detect_result_json(const std::string& method,
                                  const nlohmann::json& config_used,
                                  const AnomalyResult& result,
                                  const std::vector<std::string>& row_ids);

// --- inject -----------------------------------------------------------------

struct InjectOptions {
  std::string input_csv;
  std::string schema_path;
  std::uint64_t seed = kDefaultSeed;
  std::string spec_path;  // optional explicit anomaly file
  std::string output_csv;
  std::string records_path;
};

std::vector<InjectionRecord> run_inject(const InjectOptions& opts);
nlohmann::json injection_records_json(const std::vector<InjectionRecord>& records,
                                      const Dataset& ds);

// --- tune -------------------------------------------------------------------

struct TuneOptions {
  std::string input_csv;
  std::string schema_path;
  std::string method;  // kmeans | dbscan | iforest
  nlohmann::json config = nlohmann::json::object();
  std::uint64_t seed = kDefaultSeed;
  std::string output_path;
};

nlohmann::json run_tune(const TuneOptions& opts);

// --- benchmark ----------------------------------------------------------------

struct BenchmarkOptions {
  std::string input_csv;
  std::string schema_path;
  std::vector<std::string> methods;  // empty: all known methods
  std::uint64_t master_seed = kDefaultSeed;
  std::uint64_t inject_seed = kDefaultSeed;
  std::string injection_spec_path;
  std::string out_dir;
  double timeout_seconds = 600.0;
  nlohmann::json method_configs = nlohmann::json::object();
  bool parallel = false;
  std::string dataset_name;  // empty: derived from input path
};

report::BenchmarkReport run_benchmark(const BenchmarkOptions& opts);

// Benchmark core over an in-memory dataset; used by run_benchmark and tests.
report::BenchmarkReport benchmark_dataset(const Dataset& injected,
                                          const std::vector<InjectionRecord>& records,
                                          const BenchmarkOptions& opts);

// --- presets ------------------------------------------------------------------

// presets file: {"<name>": {"<method>": {config...}, ...}, ...}
nlohmann::json load_presets(const std::string& path);
nlohmann::json preset_configs(const nlohmann::json& presets,
                              const std::string& name);

}  // namespace anomkit::pipeline
