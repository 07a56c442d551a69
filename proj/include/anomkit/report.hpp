#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "anomkit/scoring.hpp"

namespace anomkit::report {

struct MethodReport {
  std::string method;
  std::string status = "ok";  // "ok" or "DNF"
  scoring::EvalMetrics metrics;
  double threshold = 0.0;
  nlohmann::json config_used = nlohmann::json::object();
};

struct BenchmarkReport {
  std::string dataset;
  std::size_t n_rows = 0;
  std::size_t n_cols = 0;  // post-encoding feature count
  std::uint64_t master_seed = 0;
  std::string artifact_version;
  std::string hardware;
  bool runtimes_comparable = true;
  double timeout_seconds = 0.0;
  std::vector<MethodReport> methods;
};

nlohmann::json to_json(const BenchmarkReport& report);
std::string to_markdown(const BenchmarkReport& report);
std::string to_svg(const BenchmarkReport& report);

std::string hardware_summary();

}  // namespace anomkit::report
