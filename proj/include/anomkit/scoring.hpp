#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "anomkit/deadline.hpp"
#include "anomkit/matrix.hpp"
#include "anomkit/proximity.hpp"
#include "anomkit/result.hpp"

namespace anomkit::scoring {

struct EvalMetrics {
  int injected_found = 0;  // 0..4
  std::size_t total_flagged = 0;
  double flagged_fraction = 0.0;
  double runtime_seconds = 0.0;
  std::optional<double> quality;  // silhouette or mean anomaly score
};

// Mean silhouette over the evaluated rows. Noise rows (label -1) are left
// out entirely when exclude_noise is set; singleton clusters and degenerate
// a = b = 0 points contribute 0.
double silhouette(const Matrix& x, const std::vector<int>& labels,
                  bool exclude_noise,
                  const Deadline& deadline = Deadline::none());

// Index with the largest perpendicular distance to the first-last chord;
// ties resolve to the smallest index. Needs >= 3 points.
std::size_t knee_point(std::span<const double> curve);

struct KmeansTuneOutcome {
  std::size_t best_k = 0;
  proximity::KMeansModel best_model;
  std::vector<std::pair<std::size_t, double>> silhouettes;  // per k
};

KmeansTuneOutcome tune_kmeans(const Matrix& x,
                              const std::vector<std::size_t>& k_range,
                              std::uint64_t seed, double m,
                              const Deadline& deadline = Deadline::none());

struct DbscanTraceEntry {
  std::size_t kappa = 0;
  double epsilon = 0.0;
  double quality = 0.0;  // -inf for degenerate configs
  double runtime_seconds = 0.0;
};

struct DbscanTuneOutcome {
  proximity::DbscanConfig best;
  double best_silhouette = 0.0;
  std::vector<int> labels;  // labeling under the best config
  std::vector<DbscanTraceEntry> trace;
};

// For each kappa: epsilon = knee of the sorted kappa-distance curve, run
// dbscan, score by silhouette over non-noise points (>= 2 clusters required,
// degenerate configs score -inf). Throws NoValidConfigError if nothing scores.
DbscanTuneOutcome tune_dbscan(const Matrix& x,
                              const std::vector<std::size_t>& kappa_grid,
                              std::uint64_t seed,
                              const Deadline& deadline = Deadline::none());

EvalMetrics evaluate_run(const AnomalyResult& result,
                         const std::vector<std::string>& injected_ids,
                         const std::vector<std::string>& row_ids);

// q in [0, 100], linear interpolation between order statistics
double percentile(std::vector<double> values, double q);

}  // namespace anomkit::scoring
