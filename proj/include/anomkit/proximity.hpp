#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "anomkit/deadline.hpp"
#include "anomkit/matrix.hpp"
#include "anomkit/result.hpp"

namespace anomkit::proximity {

struct KnnConfig {
  std::size_t k = 3;
  double m = 2.0;  // threshold multiplier on the score standard deviation
};

struct KMeansModel {
  std::size_t k = 0;
  Matrix centroids;             // k x d
  std::vector<int> assignments;
  double inertia = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> inertia_history;  // one entry per Lloyd iteration
  std::size_t iterations = 0;
};

struct DbscanConfig {
  double epsilon = 0.5;
  std::size_t kappa = 5;  // minimum neighborhood size, the point itself counts
};

struct DbscanResult {
  std::vector<int> labels;  // cluster ids >= 0, noise = -1
  std::vector<bool> core;
};

// Mean Euclidean distance from each row to its k nearest other rows.
// Exact O(n^2); ties on equal distance break toward the lower row index.
std::vector<double> knn_scores(const Matrix& x, std::size_t k,
                               const Deadline& deadline = Deadline::none());

// threshold = mean + m * population-std; flag strictly above.
std::pair<double, std::vector<bool>> mean_std_flag(
    const std::vector<double>& scores, double m);

KMeansModel kmeans_fit(const Matrix& x, std::size_t k, std::uint64_t seed,
                       std::size_t max_iter = 300, double tol = 1e-6,
                       const Deadline& deadline = Deadline::none());

// Scores rows by distance to their assigned centroid, flags via mean_std_flag.
AnomalyResult kmeans_detect(const KMeansModel& model, const Matrix& x, double m);

DbscanResult dbscan(const Matrix& x, const DbscanConfig& cfg,
                    const Deadline& deadline = Deadline::none());

AnomalyResult knn_detect(const Matrix& x, const KnnConfig& cfg,
                         const Deadline& deadline = Deadline::none());
AnomalyResult dbscan_detect(const Matrix& x, const DbscanConfig& cfg,
                            const Deadline& deadline = Deadline::none());

}  // namespace anomkit::proximity
