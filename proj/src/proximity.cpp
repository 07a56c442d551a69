#include "anomkit/proximity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

#include "anomkit/errors.hpp"
#include "anomkit/rng.hpp"

namespace anomkit::proximity {

namespace {

void require_k(std::size_t k, std::size_t n) {
  if (k < 1 || k > n - 1) {
    throw KTooLargeError("k must be in [1, n-1], got k=" + std::to_string(k) +
                         " for n=" + std::to_string(n));
  }
}

}  // namespace

std::vector<double> knn_scores(const Matrix& x, std::size_t k,
                               const Deadline& deadline) {
  const std::size_t n = x.rows;
  if (n == 0) throw KTooLargeError("empty dataset");
  require_k(k, n);

  std::vector<double> scores(n);
  // per-row max-heap of the k smallest squared distances
  std::vector<double> heap(k);
  for (std::size_t i = 0; i < n; ++i) {
    if ((i & 0x3F) == 0) deadline.check();
    std::size_t filled = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      double d2 = squared_distance(x, i, j);
      if (filled < k) {
        heap[filled++] = d2;
        if (filled == k) std::make_heap(heap.begin(), heap.end());
      } else if (d2 < heap.front()) {
        std::pop_heap(heap.begin(), heap.end());
        heap.back() = d2;
        std::push_heap(heap.begin(), heap.end());
      }
    }
    double sum = 0.0;
    for (std::size_t t = 0; t < k; ++t) sum += std::sqrt(heap[t]);
    scores[i] = sum / static_cast<double>(k);
  }
  return scores;
}

std::pair<double, std::vector<bool>> mean_std_flag(
    const std::vector<double>& scores, double m) {
  if (scores.empty()) throw Error("mean_std_flag: empty score vector");
  const double n = static_cast<double>(scores.size());
  double mean = std::accumulate(scores.begin(), scores.end(), 0.0) / n;
  double var = 0.0;
  for (double s : scores) var += (s - mean) * (s - mean);
  var /= n;
  double threshold = mean + m * std::sqrt(var);
  std::vector<bool> flags(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    flags[i] = scores[i] > threshold;
  }
  return {threshold, flags};
}

namespace {

// argmin-distance centroid, ties to the lower centroid index
int nearest_centroid(const Matrix& centroids, std::span<const double> p) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.rows; ++c) {
    double d = squared_distance(centroids.row(c), p);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  return best;
}

Matrix kmeanspp_init(const Matrix& x, std::size_t k, Rng& rng) {
  const std::size_t n = x.rows;
  Matrix centroids(k, x.cols);
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());

  std::size_t first = rng.uniform_index(n);
  std::copy(x.row(first).begin(), x.row(first).end(), centroids.row(0).begin());

  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double d = squared_distance(x.row(i), centroids.row(c - 1));
      if (d < d2[i]) d2[i] = d;
      total += d2[i];
    }
    std::size_t pick;
    if (total > 0.0) {
      double r = rng.uniform() * total;
      double acc = 0.0;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc > r) {
          pick = i;
          break;
        }
      }
    } else {
      pick = rng.uniform_index(n);
    }
    std::copy(x.row(pick).begin(), x.row(pick).end(), centroids.row(c).begin());
  }
  return centroids;
}

}  // namespace

KMeansModel kmeans_fit(const Matrix& x, std::size_t k, std::uint64_t seed,
                       std::size_t max_iter, double tol,
                       const Deadline& deadline) {
  const std::size_t n = x.rows;
  if (k < 2 || k > n) {
    throw KTooLargeError("k must be in [2, n] for k-means, got " +
                         std::to_string(k));
  }

  Rng rng(seed);
  KMeansModel model;
  model.k = k;
  model.seed = seed;
  model.centroids = kmeanspp_init(x, k, rng);
  model.assignments.assign(n, 0);

  auto assign_all = [&]() {
    for (std::size_t i = 0; i < n; ++i) {
      model.assignments[i] = nearest_centroid(model.centroids, x.row(i));
    }
  };
  auto compute_inertia = [&]() {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      s += squared_distance(
          x.row(i), model.centroids.row(static_cast<std::size_t>(model.assignments[i])));
    }
    return s;
  };
  auto fix_empty_clusters = [&]() {
    std::vector<std::size_t> counts(k, 0);
    for (int a : model.assignments) counts[static_cast<std::size_t>(a)]++;
    std::vector<bool> stolen(n, false);
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      // re-seed to the point farthest from its current centroid
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (stolen[i]) continue;
        std::size_t a = static_cast<std::size_t>(model.assignments[i]);
        if (counts[a] <= 1) continue;  // do not empty another cluster
        double d = squared_distance(x.row(i), model.centroids.row(a));
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      if (far_d < 0.0) continue;
      counts[static_cast<std::size_t>(model.assignments[far])]--;
      std::copy(x.row(far).begin(), x.row(far).end(), model.centroids.row(c).begin());
      model.assignments[far] = static_cast<int>(c);
      counts[c] = 1;
      stolen[far] = true;
    }
  };

  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    deadline.check();
    assign_all();
    fix_empty_clusters();
    model.inertia = compute_inertia();
    model.inertia_history.push_back(model.inertia);
    model.iterations = iter + 1;

    // recompute centroids as cluster means
    Matrix means(k, x.cols, 0.0);
    std::vector<double> counts(k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t a = static_cast<std::size_t>(model.assignments[i]);
      counts[a] += 1.0;
      for (std::size_t c = 0; c < x.cols; ++c) means(a, c) += x(i, c);
    }
    double shift = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0.0) {
        std::copy(model.centroids.row(c).begin(), model.centroids.row(c).end(),
                  means.row(c).begin());
        continue;
      }
      for (std::size_t j = 0; j < x.cols; ++j) means(c, j) /= counts[c];
      shift = std::max(shift,
                       std::sqrt(squared_distance(means.row(c), model.centroids.row(c))));
    }
    model.centroids = std::move(means);
    if (shift < tol) break;
  }

  // final pass so assignments match the returned centroids
  assign_all();
  model.inertia = compute_inertia();
  model.inertia_history.push_back(model.inertia);
  return model;
}

AnomalyResult kmeans_detect(const KMeansModel& model, const Matrix& x, double m) {
  AnomalyResult res;
  res.method = "kmeans";
  res.scores.resize(x.rows);
  for (std::size_t i = 0; i < x.rows; ++i) {
    res.scores[i] = euclidean_distance(
        x.row(i), model.centroids.row(static_cast<std::size_t>(model.assignments[i])));
  }
  auto [threshold, flags] = mean_std_flag(res.scores, m);
  res.threshold = threshold;
  res.flags = std::move(flags);
  return res;
}

DbscanResult dbscan(const Matrix& x, const DbscanConfig& cfg,
                    const Deadline& deadline) {
  const std::size_t n = x.rows;
  const double eps2 = cfg.epsilon * cfg.epsilon;
  DbscanResult res;
  res.labels.assign(n, -1);
  res.core.assign(n, false);

  // neighborhoods are recomputed on demand: O(n) memory, two O(n^2) passes
  auto neighbors_of = [&](std::size_t i, std::vector<std::size_t>& out) {
    out.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i && squared_distance(x, i, j) <= eps2) out.push_back(j);
    }
  };

  // kappa counts the point itself
  std::vector<std::size_t> neigh;
  for (std::size_t i = 0; i < n; ++i) {
    if ((i & 0x3F) == 0) deadline.check();
    std::size_t count = 1;
    for (std::size_t j = 0; j < n && count < cfg.kappa; ++j) {
      if (j != i && squared_distance(x, i, j) <= eps2) ++count;
    }
    res.core[i] = count >= cfg.kappa;
  }

  int next_cluster = 0;
  std::vector<bool> queued(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    if (!res.core[i] || res.labels[i] != -1) continue;
    const int cluster = next_cluster++;
    std::queue<std::size_t> frontier;
    frontier.push(i);
    queued[i] = true;
    res.labels[i] = cluster;
    while (!frontier.empty()) {
      deadline.check();
      std::size_t p = frontier.front();
      frontier.pop();
      neighbors_of(p, neigh);
      for (std::size_t q : neigh) {
        if (res.labels[q] == -1) res.labels[q] = cluster;
        if (res.core[q] && !queued[q]) {
          queued[q] = true;
          frontier.push(q);
        }
      }
    }
  }
  return res;
}

AnomalyResult knn_detect(const Matrix& x, const KnnConfig& cfg,
                         const Deadline& deadline) {
  AnomalyResult res;
  res.method = "nn";
  res.scores = knn_scores(x, cfg.k, deadline);
  auto [threshold, flags] = mean_std_flag(res.scores, cfg.m);
  res.threshold = threshold;
  res.flags = std::move(flags);
  return res;
}

AnomalyResult dbscan_detect(const Matrix& x, const DbscanConfig& cfg,
                            const Deadline& deadline) {
  DbscanResult r = dbscan(x, cfg, deadline);
  AnomalyResult res;
  res.method = "dbscan";
  res.scores.resize(x.rows);
  res.flags.resize(x.rows);
  res.threshold = 0.5;
  for (std::size_t i = 0; i < x.rows; ++i) {
    bool noise = r.labels[i] == -1;
    res.scores[i] = noise ? 1.0 : 0.0;
    res.flags[i] = noise;
  }
  return res;
}

}  // namespace anomkit::proximity
