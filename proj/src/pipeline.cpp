#include "anomkit/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <future>
#include <unordered_map>

#include "anomkit/errors.hpp"
#include "anomkit/hdbscan.hpp"
#include "anomkit/iforest.hpp"
#include "anomkit/json_io.hpp"
#include "anomkit/neural.hpp"
#include "anomkit/ocsvm.hpp"
#include "anomkit/proximity.hpp"
#include "anomkit/rng.hpp"
#include "anomkit/scoring.hpp"
#include "anomkit/version.hpp"

namespace anomkit::pipeline {

namespace fs = std::filesystem;

std::uint64_t default_master_seed() {
  if (const char* env = std::getenv("ANOMKIT_SEED")) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (end && *end == '\0') return static_cast<std::uint64_t>(v);
  }
  return kDefaultSeed;
}

const std::vector<std::string>& known_methods() {
  static const std::vector<std::string> methods = {
      "nn",     "kmeans", "dbscan", "hdbscan",     "ocsvm",
      "iforest", "ae",     "vae",    "ae-ensemble", "vae-ensemble"};
  return methods;
}

namespace {

double now_seconds(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

// population z-score per column; zero-variance columns pass through
Matrix standardize_matrix(const Matrix& x) {
  Matrix out = x;
  for (std::size_t c = 0; c < x.cols; ++c) {
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t r = 0; r < x.rows; ++r) {
      sum += x(r, c);
      sum2 += x(r, c) * x(r, c);
    }
    const double n = static_cast<double>(x.rows);
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    if (var <= 0.0) continue;
    const double sd = std::sqrt(var);
    for (std::size_t r = 0; r < x.rows; ++r) {
      out(r, c) = (x(r, c) - mean) / sd;
    }
  }
  return out;
}

std::optional<double> safe_silhouette(const Matrix& x,
                                      const std::vector<int>& labels,
                                      bool exclude_noise,
                                      const Deadline& deadline) {
  try {
    return scoring::silhouette(x, labels, exclude_noise, deadline);
  } catch (const TooFewClustersError&) {
    return std::nullopt;
  }
}

neural::MlpArch arch_from_json(std::size_t input, const nlohmann::json& j) {
  neural::MlpArch arch;
  arch.input = input;
  arch.hidden = j.at("hidden").get<std::vector<std::size_t>>();
  arch.latent = j.at("latent").get<std::size_t>();
  return arch;
}

nlohmann::json arch_to_json(const neural::MlpArch& arch) {
  return {{"hidden", arch.hidden}, {"latent", arch.latent}};
}

// dataset-width presets mirroring the reference architecture tables, with
// latent widths clamped to the input width
std::vector<neural::MlpArch> default_ensemble_archs(std::size_t d, bool vae) {
  auto cap = [&](std::size_t p) { return std::max<std::size_t>(1, std::min(p, d)); };
  std::vector<neural::MlpArch> archs;
  if (d <= 18) {
    if (!vae) {
      archs = {{d, {6, 3}, cap(1)}, {d, {64, 32}, cap(16)}, {d, {32, 16}, cap(6)}};
    } else {
      archs = {{d, {6, 3}, cap(1)}, {d, {128, 64}, cap(32)}, {d, {32, 16}, cap(16)}};
    }
  } else {
    if (!vae) {
      archs = {{d, {25, 12}, cap(6)}, {d, {64, 32}, cap(16)}, {d, {64, 32}, cap(10)}};
    } else {
      archs = {{d, {25, 12}, cap(6)}, {d, {128, 64}, cap(32)}, {d, {64, 32}, cap(10)}};
    }
  }
  return archs;
}

struct NeuralSpec {
  std::vector<neural::MlpArch> archs;
  std::vector<std::size_t> epochs;  // per model
  double lr = 1e-3;
  std::size_t batch = 32;
  double beta = 1.0;
  double t = 0.5;
  std::string threshold_mode = "absolute";
  double percentile_q = 97.0;
};

NeuralSpec parse_neural_spec(const std::string& method, std::size_t d,
                             const nlohmann::json& config) {
  const bool vae = method == "vae" || method == "vae-ensemble";
  const bool ensemble = method.ends_with("ensemble");
  NeuralSpec spec;
  spec.lr = config.value("lr", 1e-3);
  spec.batch = config.value("batch", std::size_t{32});
  spec.beta = config.value("beta", 1.0);
  spec.t = config.value("t", 0.5);
  spec.threshold_mode = config.value("threshold_mode", std::string("absolute"));
  spec.percentile_q = config.value("percentile", 97.0);
  const std::size_t default_epochs = config.value("epochs", std::size_t{120});

  if (ensemble && config.contains("models")) {
    for (const auto& mj : config.at("models")) {
      spec.archs.push_back(arch_from_json(d, mj));
      spec.epochs.push_back(mj.value("epochs", default_epochs));
    }
  } else if (!ensemble && config.contains("arch")) {
    spec.archs.push_back(arch_from_json(d, config.at("arch")));
    spec.epochs.push_back(default_epochs);
  } else if (ensemble) {
    spec.archs = default_ensemble_archs(d, vae);
    spec.epochs.assign(spec.archs.size(), default_epochs);
  } else {
    spec.archs.push_back(
        {d, {64, 32}, std::max<std::size_t>(1, std::min<std::size_t>(16, d))});
    spec.epochs.push_back(default_epochs);
  }
  if (spec.archs.empty()) throw ConfigError("ensemble config has no models");
  return spec;
}

MethodRun run_neural(const std::string& method, const Matrix& x,
                     const nlohmann::json& config, std::uint64_t seed,
                     const Deadline& deadline,
                     const std::vector<bool>* clean_mask) {
  const bool vae = method == "vae" || method == "vae-ensemble";
  NeuralSpec spec = parse_neural_spec(method, x.cols, config);
  Matrix xs = standardize_matrix(x);

  std::vector<std::vector<double>> per_model;
  nlohmann::json models_used = nlohmann::json::array();
  for (std::size_t i = 0; i < spec.archs.size(); ++i) {
    neural::TrainConfig tc;
    tc.learning_rate = spec.lr;
    tc.epochs = spec.epochs[i];
    tc.batch_size = spec.batch;
    tc.seed = mix_seed(seed, i);
    tc.beta = spec.beta;
    if (vae) {
      auto model = neural::train_vae(xs, spec.archs[i], tc, deadline);
      per_model.push_back(neural::reconstruction_errors(model, xs, deadline));
    } else {
      auto model = neural::train_autoencoder(xs, spec.archs[i], tc, deadline);
      per_model.push_back(neural::reconstruction_errors(model, xs, deadline));
    }
    nlohmann::json mj = arch_to_json(spec.archs[i]);
    mj["epochs"] = spec.epochs[i];
    models_used.push_back(mj);
  }

  std::vector<double> avg = neural::average_errors(per_model);
  double t = spec.t;
  if (spec.threshold_mode == "percentile") {
    std::vector<double> basis;
    if (clean_mask) {
      for (std::size_t i = 0; i < avg.size(); ++i) {
        if ((*clean_mask)[i]) basis.push_back(avg[i]);
      }
    } else {
      basis = avg;
    }
    t = scoring::percentile(basis, spec.percentile_q);
  } else if (spec.threshold_mode != "absolute") {
    throw ConfigError("unknown threshold_mode: " + spec.threshold_mode);
  }

  MethodRun run;
  run.result = neural::ensemble_flag(avg, t, method);
  run.config_used = {{"models", models_used},
                     {"lr", spec.lr},
                     {"batch", spec.batch},
                     {"t", t},
                     {"threshold_mode", spec.threshold_mode}};
  if (vae) run.config_used["beta"] = spec.beta;
  if (spec.threshold_mode == "percentile") {
    run.config_used["percentile"] = spec.percentile_q;
  }
  return run;
}

std::vector<iforest::IForestConfig> default_iforest_grid() {
  std::vector<iforest::IForestConfig> grid;
  for (double f_max : {0.5, 1.0}) {
    for (double s_max : {0.25, 0.5, 1.0}) {
      for (std::size_t n_est : {std::size_t{50}, std::size_t{100}}) {
        grid.push_back({n_est, s_max, f_max, 0});
      }
    }
  }
  return grid;
}

std::vector<iforest::IForestConfig> iforest_grid_from_json(
    const nlohmann::json& tune) {
  if (!tune.contains("grid")) return default_iforest_grid();
  std::vector<iforest::IForestConfig> grid;
  for (const auto& gj : tune.at("grid")) {
    iforest::IForestConfig cfg;
    cfg.n_est = gj.value("n_est", std::size_t{100});
    cfg.s_max = gj.value("s_max", 1.0);
    cfg.f_max = gj.value("f_max", 1.0);
    grid.push_back(cfg);
  }
  if (grid.empty()) throw ConfigError("empty iforest tuning grid");
  return grid;
}

}  // namespace

MethodRun run_method(const std::string& method, const Matrix& x,
                     const nlohmann::json& config, std::uint64_t seed,
                     const Deadline& deadline,
                     const std::vector<bool>* clean_mask) {
  MethodRun run;

  if (method == "nn") {
    proximity::KnnConfig cfg;
    cfg.k = config.value("k", std::size_t{3});
    cfg.m = config.value("m", 2.0);
    run.result = proximity::knn_detect(x, cfg, deadline);
    run.config_used = {{"k", cfg.k}, {"m", cfg.m}};
    return run;
  }

  if (method == "kmeans") {
    const double m = config.value("m", 2.0);
    proximity::KMeansModel model;
    if (config.contains("tune")) {
      const auto& tune = config.at("tune");
      std::size_t k_min = tune.value("k_min", std::size_t{2});
      std::size_t k_max = tune.value("k_max", std::size_t{10});
      k_max = std::min(k_max, x.rows > 1 ? x.rows - 1 : std::size_t{2});
      std::vector<std::size_t> range;
      for (std::size_t k = k_min; k <= k_max; ++k) range.push_back(k);
      auto out = scoring::tune_kmeans(x, range, seed, m, deadline);
      model = std::move(out.best_model);
      run.config_used = {{"k", out.best_k}, {"m", m}, {"tuned", true}};
    } else {
      std::size_t k = config.value("k", std::size_t{8});
      model = proximity::kmeans_fit(x, k, seed, config.value("max_iter", std::size_t{300}),
                                    config.value("tol", 1e-6), deadline);
      run.config_used = {{"k", k}, {"m", m}};
    }
    run.quality = safe_silhouette(x, model.assignments, false, deadline);
    run.result = proximity::kmeans_detect(model, x, m);
    return run;
  }

  if (method == "dbscan") {
    auto noise_result = [&](const std::vector<int>& labels) {
      AnomalyResult res;
      res.method = "dbscan";
      res.threshold = 0.5;
      res.scores.resize(x.rows);
      res.flags.resize(x.rows);
      for (std::size_t i = 0; i < x.rows; ++i) {
        bool noise = labels[i] == -1;
        res.scores[i] = noise ? 1.0 : 0.0;
        res.flags[i] = noise;
      }
      return res;
    };
    if (config.contains("tune")) {
      const auto& tune = config.at("tune");
      std::vector<std::size_t> grid =
          tune.value("kappa_grid", std::vector<std::size_t>{5, 10, 20});
      auto out = scoring::tune_dbscan(x, grid, seed, deadline);
      run.result = noise_result(out.labels);
      run.quality = out.best_silhouette;
      run.config_used = {{"epsilon", out.best.epsilon},
                         {"kappa", out.best.kappa},
                         {"tuned", true}};
    } else {
      proximity::DbscanConfig cfg;
      cfg.epsilon = config.value("epsilon", 0.5);
      cfg.kappa = config.value("kappa", std::size_t{5});
      proximity::DbscanResult r = proximity::dbscan(x, cfg, deadline);
      run.quality = safe_silhouette(x, r.labels, true, deadline);
      run.result = noise_result(r.labels);
      run.config_used = {{"epsilon", cfg.epsilon}, {"kappa", cfg.kappa}};
    }
    return run;
  }

  if (method == "hdbscan") {
    hdbscan::HdbscanConfig cfg;
    cfg.kappa = config.value("kappa", std::size_t{10});
    cfg.min_cluster_size = config.value("min_cluster_size", std::size_t{5});
    cfg.kappa = std::min(cfg.kappa, x.rows > 1 ? x.rows - 1 : std::size_t{1});
    auto out = hdbscan::hdbscan_fit(x, cfg, deadline);
    if (config.contains("tree_dump")) {
      write_text_file(config.at("tree_dump").get<std::string>(),
                      hdbscan::condensed_tree_json(out.tree));
    }
    run.quality = safe_silhouette(x, out.labels, true, deadline);
    run.result.method = "hdbscan";
    run.result.threshold = 0.5;
    run.result.scores.resize(x.rows);
    run.result.flags.resize(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i) {
      bool noise = out.labels[i] == -1;
      run.result.scores[i] = noise ? 1.0 : 0.0;
      run.result.flags[i] = noise;
    }
    run.config_used = {{"kappa", cfg.kappa},
                       {"min_cluster_size", cfg.min_cluster_size}};
    return run;
  }

  if (method == "ocsvm") {
    ocsvm::OcsvmConfig cfg;
    cfg.nu = config.value("nu", 0.1);
    cfg.gamma = config.value("gamma", 0.0);
    cfg.tol = config.value("tol", 1e-4);
    cfg.max_iter = config.value("max_iter", std::size_t{10000});
    run.result = ocsvm::ocsvm_detect(x, cfg, deadline);
    run.config_used = {{"nu", cfg.nu},
                       {"gamma", cfg.gamma > 0.0 ? cfg.gamma
                                                 : 1.0 / static_cast<double>(x.cols)},
                       {"tol", cfg.tol},
                       {"max_iter", cfg.max_iter}};
    return run;
  }

  if (method == "iforest") {
    iforest::IForestOutcome outcome;
    if (config.contains("tune")) {
      auto grid = iforest_grid_from_json(config.at("tune"));
      auto tuned = iforest::tune_iforest(x, grid, seed, deadline);
      outcome = iforest::iforest_detect(x, tuned.best, deadline);
      run.config_used = {{"n_est", tuned.best.n_est},
                         {"s_max", tuned.best.s_max},
                         {"f_max", tuned.best.f_max},
                         {"tuned", true}};
    } else {
      iforest::IForestConfig cfg;
      cfg.n_est = config.value("n_est", std::size_t{100});
      cfg.s_max = config.value("s_max", 1.0);
      cfg.f_max = config.value("f_max", 1.0);
      cfg.seed = seed;
      outcome = iforest::iforest_detect(x, cfg, deadline);
      run.config_used = {{"n_est", cfg.n_est},
                         {"s_max", cfg.s_max},
                         {"f_max", cfg.f_max}};
    }
    run.quality = outcome.mean_score;
    run.result = std::move(outcome.result);
    return run;
  }

  if (method == "ae" || method == "vae" || method == "ae-ensemble" ||
      method == "vae-ensemble") {
    return run_neural(method, x, config, seed, deadline, clean_mask);
  }

  throw ConfigError("unknown method: " + method);
}

// --- preprocess -------------------------------------------------------------

PreprocessSummary run_preprocess(const PreprocessOptions& opts) {
  auto schema = load_schema(opts.schema_path);
  Dataset ds = load_csv(opts.input_csv, schema);

  auto [clean, dropped] = drop_missing(ds);
  nlohmann::json report;
  report["dropped_rows"] = dropped;
  report["added_columns"] = nlohmann::json::array();

  if (!opts.bmi_weight_col.empty() && !opts.bmi_height_col.empty()) {
    clean = derive_bmi(clean, opts.bmi_weight_col, opts.bmi_height_col,
                       opts.height_unit);
    report["added_columns"].push_back("BMI");
  }

  report["encoding_map"] = nlohmann::json::object();
  if (opts.encode) {
    auto [encoded, enc_report] = one_hot_encode(clean);
    clean = std::move(encoded);
    for (const auto& [col, cats] : enc_report.encoding_map) {
      report["encoding_map"][col] = cats;
    }
    report["single_category_warnings"] = enc_report.single_category_warnings;
  }

  if (opts.scale) {
    auto [scaled, params] = standardize(clean);
    clean = std::move(scaled);
    nlohmann::json scaler;
    scaler["columns"] = params.columns;
    scaler["mean"] = params.mean;
    scaler["stddev"] = params.stddev;
    scaler["zero_variance"] = params.zero_variance;
    report["scaler"] = scaler;
  } else {
    report["scaler"] = nullptr;
  }

  report["n_rows"] = clean.n_rows();
  report["n_cols"] = clean.n_cols();

  save_csv(clean, opts.output_csv);

  // schema describing the written CSV, so downstream commands can load it
  nlohmann::json out_schema;
  out_schema["columns"] = nlohmann::json::array();
  for (const auto& col : clean.schema) {
    nlohmann::json cj;
    cj["name"] = col.name;
    cj["kind"] = to_string(col.kind);
    if (!col.unit.empty()) cj["unit"] = col.unit;
    out_schema["columns"].push_back(cj);
  }
  std::string schema_path = opts.output_schema_path.empty()
                                ? opts.output_csv + ".schema.json"
                                : opts.output_schema_path;
  write_text_file(schema_path, dump_deterministic(out_schema));
  report["output_schema"] = schema_path;

  if (!opts.report_path.empty()) {
    write_text_file(opts.report_path, dump_deterministic(report));
  }

  PreprocessSummary summary;
  summary.dropped_rows = dropped;
  summary.n_rows = clean.n_rows();
  summary.n_cols = clean.n_cols();
  summary.report = std::move(report);
  return summary;
}

// --- detect -----------------------------------------------------------------

nlohmann::json detect_result_json(const std::string& method,
                                  const nlohmann::json& config_used,
                                  const AnomalyResult& result,
                                  const std::vector<std::string>& row_ids) {
  nlohmann::json j;
  j["method"] = method;
  j["config"] = config_used;
  j["threshold"] = result.threshold;
  j["runtime_seconds"] = result.runtime_seconds;
  j["rows"] = nlohmann::json::array();
  for (std::size_t i = 0; i < row_ids.size(); ++i) {
    j["rows"].push_back({{"id", row_ids[i]},
                         {"score", result.scores[i]},
                         {"flag", static_cast<bool>(result.flags[i])}});
  }
  return j;
}

DetectOutcome run_detect(const DetectOptions& opts) {
  auto schema = load_schema(opts.schema_path);
  Dataset ds = load_csv(opts.input_csv, schema);
  Matrix x = numeric_matrix(ds);

  Deadline deadline = opts.timeout_seconds > 0.0
                          ? Deadline::after_seconds(opts.timeout_seconds)
                          : Deadline::none();

  auto t0 = std::chrono::steady_clock::now();
  MethodRun run = run_method(opts.method, x, opts.config, opts.seed, deadline);
  run.result.runtime_seconds = now_seconds(t0);

  DetectOutcome out;
  out.result_json =
      detect_result_json(opts.method, run.config_used, run.result, ds.row_ids);
  out.run = std::move(run);

  if (!opts.output_path.empty()) {
    write_text_file(opts.output_path, dump_deterministic(out.result_json));
  }
  return out;
}

// --- inject -----------------------------------------------------------------

nlohmann::json injection_records_json(const std::vector<InjectionRecord>& records,
                                      const Dataset& ds) {
  nlohmann::json j;
  j["anomalies"] = nlohmann::json::array();
  for (const auto& rec : records) {
    nlohmann::json values = nlohmann::json::object();
    for (std::size_t c = 0; c < ds.schema.size(); ++c) {
      if (ds.schema[c].kind == ColumnKind::Identifier) continue;
      const Cell& cell = rec.payload[c];
      if (cell.is_number()) {
        values[ds.schema[c].name] = cell.number_value();
      } else if (cell.is_text()) {
        values[ds.schema[c].name] = cell.text_value();
      } else {
        values[ds.schema[c].name] = nullptr;
      }
    }
    j["anomalies"].push_back({{"grade", to_string(rec.grade)},
                              {"id", rec.assigned_id},
                              {"values", values}});
  }
  return j;
}

std::vector<InjectionRecord> run_inject(const InjectOptions& opts) {
  auto schema = load_schema(opts.schema_path);
  Dataset ds = load_csv(opts.input_csv, schema);

  std::vector<InjectionRecord> spec;
  std::pair<Dataset, std::vector<InjectionRecord>> out;
  if (!opts.spec_path.empty()) {
    spec = load_injection_spec(opts.spec_path, ds);
    out = inject_anomalies(ds, opts.seed, &spec);
  } else {
    out = inject_anomalies(ds, opts.seed);
  }

  if (!opts.output_csv.empty()) save_csv(out.first, opts.output_csv);
  if (!opts.records_path.empty()) {
    write_text_file(opts.records_path,
                    dump_deterministic(injection_records_json(out.second, ds)));
  }
  return out.second;
}

// --- tune -------------------------------------------------------------------

nlohmann::json run_tune(const TuneOptions& opts) {
  auto schema = load_schema(opts.schema_path);
  Dataset ds = load_csv(opts.input_csv, schema);
  Matrix x = numeric_matrix(ds);

  nlohmann::json trace;
  trace["method"] = opts.method;
  trace["entries"] = nlohmann::json::array();

  if (opts.method == "kmeans") {
    std::size_t k_min = opts.config.value("k_min", std::size_t{2});
    std::size_t k_max = opts.config.value("k_max", std::size_t{10});
    k_max = std::min(k_max, x.rows > 1 ? x.rows - 1 : std::size_t{2});
    std::vector<std::size_t> range;
    for (std::size_t k = k_min; k <= k_max; ++k) range.push_back(k);
    auto out = scoring::tune_kmeans(x, range, opts.seed,
                                    opts.config.value("m", 2.0));
    for (const auto& [k, sil] : out.silhouettes) {
      trace["entries"].push_back({{"config", {{"k", k}}}, {"quality", sil}});
    }
    trace["best"] = {{"k", out.best_k}};
  } else if (opts.method == "dbscan") {
    std::vector<std::size_t> grid =
        opts.config.value("kappa_grid", std::vector<std::size_t>{5, 10, 20});
    auto out = scoring::tune_dbscan(x, grid, opts.seed);
    for (const auto& e : out.trace) {
      nlohmann::json q;
      if (std::isfinite(e.quality)) q = e.quality;
      trace["entries"].push_back(
          {{"config", {{"kappa", e.kappa}, {"epsilon", e.epsilon}}},
           {"quality", q},
           {"runtime_seconds", e.runtime_seconds}});
    }
    trace["best"] = {{"kappa", out.best.kappa}, {"epsilon", out.best.epsilon}};
  } else if (opts.method == "iforest") {
    auto grid = iforest_grid_from_json(opts.config);
    auto out = iforest::tune_iforest(x, grid, opts.seed);
    for (std::size_t g = 0; g < grid.size(); ++g) {
      trace["entries"].push_back({{"config",
                                   {{"n_est", grid[g].n_est},
                                    {"s_max", grid[g].s_max},
                                    {"f_max", grid[g].f_max}}},
                                  {"quality", out.mean_scores[g]}});
    }
    trace["best"] = {{"n_est", out.best.n_est},
                     {"s_max", out.best.s_max},
                     {"f_max", out.best.f_max}};
  } else {
    throw ConfigError("method does not support tuning: " + opts.method);
  }

  if (!opts.output_path.empty()) {
    write_text_file(opts.output_path, dump_deterministic(trace));
  }
  return trace;
}

// --- benchmark ----------------------------------------------------------------

namespace {

nlohmann::json default_benchmark_config(const std::string& method) {
  if (method == "kmeans" || method == "dbscan" || method == "iforest") {
    return {{"tune", nlohmann::json::object()}};
  }
  return nlohmann::json::object();
}

}  // namespace

report::BenchmarkReport benchmark_dataset(
    const Dataset& injected, const std::vector<InjectionRecord>& records,
    const BenchmarkOptions& opts) {
  Matrix x = numeric_matrix(injected);

  std::vector<std::string> injected_ids;
  for (const auto& rec : records) injected_ids.push_back(rec.assigned_id);

  std::vector<bool> clean_mask(injected.n_rows(), true);
  {
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < injected.row_ids.size(); ++i) {
      index.emplace(injected.row_ids[i], i);
    }
    for (const auto& id : injected_ids) {
      auto it = index.find(id);
      if (it != index.end()) clean_mask[it->second] = false;
    }
  }

  std::vector<std::string> methods =
      opts.methods.empty() ? known_methods() : opts.methods;

  report::BenchmarkReport rep;
  rep.dataset = opts.dataset_name.empty()
                    ? (opts.input_csv.empty()
                           ? "in-memory"
                           : fs::path(opts.input_csv).filename().string())
                    : opts.dataset_name;
  rep.n_rows = injected.n_rows();
  rep.n_cols = x.cols;
  rep.master_seed = opts.master_seed;
  rep.artifact_version = kVersion;
  rep.hardware = report::hardware_summary();
  rep.runtimes_comparable = !opts.parallel;
  rep.timeout_seconds = opts.timeout_seconds;

  auto run_one = [&](std::size_t idx) -> report::MethodReport {
    const std::string& method = methods[idx];
    report::MethodReport mr;
    mr.method = method;
    nlohmann::json config = opts.method_configs.contains(method)
                                ? opts.method_configs.at(method)
                                : default_benchmark_config(method);
    const std::uint64_t seed = mix_seed(opts.master_seed, idx);
    Deadline deadline = opts.timeout_seconds > 0.0
                            ? Deadline::after_seconds(opts.timeout_seconds)
                            : Deadline::none();
    auto t0 = std::chrono::steady_clock::now();
    try {
      MethodRun run = run_method(method, x, config, seed, deadline, &clean_mask);
      run.result.runtime_seconds = now_seconds(t0);
      mr.metrics = scoring::evaluate_run(run.result, injected_ids, injected.row_ids);
      mr.metrics.quality = run.quality;
      mr.threshold = run.result.threshold;
      mr.config_used = run.config_used;
    } catch (const TimeoutError&) {
      mr.status = "DNF";
      mr.config_used = config;
    } catch (const Error& e) {
      mr.status = "error";
      mr.config_used = config;
      mr.config_used["error"] = e.what();
    }
    return mr;
  };

  if (opts.parallel) {
    std::vector<std::future<report::MethodReport>> futures;
    for (std::size_t i = 0; i < methods.size(); ++i) {
      futures.push_back(std::async(std::launch::async, run_one, i));
    }
    for (auto& f : futures) rep.methods.push_back(f.get());
  } else {
    for (std::size_t i = 0; i < methods.size(); ++i) {
      rep.methods.push_back(run_one(i));
    }
  }
  return rep;
}

report::BenchmarkReport run_benchmark(const BenchmarkOptions& opts) {
  auto schema = load_schema(opts.schema_path);
  Dataset ds = load_csv(opts.input_csv, schema);

  std::pair<Dataset, std::vector<InjectionRecord>> injected;
  if (!opts.injection_spec_path.empty()) {
    auto spec = load_injection_spec(opts.injection_spec_path, ds);
    injected = inject_anomalies(ds, opts.inject_seed, &spec);
  } else {
    injected = inject_anomalies(ds, opts.inject_seed);
  }

  report::BenchmarkReport rep =
      benchmark_dataset(injected.first, injected.second, opts);

  if (!opts.out_dir.empty()) {
    fs::create_directories(opts.out_dir);
    write_text_file((fs::path(opts.out_dir) / "report.json").string(),
                    dump_deterministic(report::to_json(rep)));
    write_text_file((fs::path(opts.out_dir) / "report.md").string(),
                    report::to_markdown(rep));
    write_text_file((fs::path(opts.out_dir) / "report.svg").string(),
                    report::to_svg(rep));
    write_text_file(
        (fs::path(opts.out_dir) / "injections.json").string(),
        dump_deterministic(injection_records_json(injected.second, ds)));
  }
  return rep;
}

// --- presets ------------------------------------------------------------------

nlohmann::json load_presets(const std::string& path) {
  return nlohmann::json::parse(read_text_file(path));
}

nlohmann::json preset_configs(const nlohmann::json& presets,
                              const std::string& name) {
  if (!presets.contains(name)) {
    throw ConfigError("unknown preset: " + name);
  }
  return presets.at(name);
}

}  // namespace anomkit::pipeline
