#include "anomkit/scoring.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <unordered_map>
#include <unordered_set>

#include "anomkit/errors.hpp"
#include "anomkit/hdbscan.hpp"
#include "anomkit/rng.hpp"

namespace anomkit::scoring {

double silhouette(const Matrix& x, const std::vector<int>& labels,
                  bool exclude_noise, const Deadline& deadline) {
  const std::size_t n = x.rows;
  if (labels.size() != n) throw Error("silhouette: label count mismatch");

  auto evaluated = [&](std::size_t i) {
    return !(exclude_noise && labels[i] == -1);
  };

  int max_label = -1;
  std::unordered_set<int> distinct;
  for (std::size_t i = 0; i < n; ++i) {
    if (!evaluated(i)) continue;
    distinct.insert(labels[i]);
    max_label = std::max(max_label, labels[i]);
  }
  if (distinct.size() < 2) {
    throw TooFewClustersError("silhouette needs >= 2 clusters, found " +
                              std::to_string(distinct.size()));
  }

  // labels may be arbitrary ints >= -1; compact them
  std::unordered_map<int, std::size_t> compact;
  for (int l : distinct) compact.emplace(l, compact.size());
  const std::size_t nc = compact.size();

  std::vector<std::size_t> counts(nc, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (evaluated(i)) counts[compact.at(labels[i])]++;
  }

  double total = 0.0;
  std::size_t evaluated_count = 0;
  std::vector<double> sums(nc);
  for (std::size_t i = 0; i < n; ++i) {
    if (!evaluated(i)) continue;
    if ((i & 0x3F) == 0) deadline.check();
    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || !evaluated(j)) continue;
      sums[compact.at(labels[j])] += euclidean_distance(x, i, j);
    }
    const std::size_t own = compact.at(labels[i]);
    ++evaluated_count;
    if (counts[own] <= 1) continue;  // singleton contributes 0

    double a = sums[own] / static_cast<double>(counts[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < nc; ++c) {
      if (c == own || counts[c] == 0) continue;
      b = std::min(b, sums[c] / static_cast<double>(counts[c]));
    }
    double denom = std::max(a, b);
    total += denom > 0.0 ? (b - a) / denom : 0.0;
  }
  return total / static_cast<double>(evaluated_count);
}

std::size_t knee_point(std::span<const double> curve) {
  const std::size_t n = curve.size();
  if (n < 3) throw CurveTooShortError("knee_point needs >= 3 points");
  const double dx = static_cast<double>(n - 1);
  const double dy = curve[n - 1] - curve[0];
  std::size_t best = 0;
  double best_cross = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    // |cross product| is proportional to the distance to the chord
    double cross =
        std::fabs(dx * (curve[i] - curve[0]) - dy * static_cast<double>(i));
    if (cross > best_cross) {
      best_cross = cross;
      best = i;
    }
  }
  return best;
}

KmeansTuneOutcome tune_kmeans(const Matrix& x,
                              const std::vector<std::size_t>& k_range,
                              std::uint64_t seed, double m,
                              const Deadline& deadline) {
  if (k_range.empty()) throw ConfigError("tune_kmeans: empty k range");
  (void)m;  // the multiplier only matters for detection, not selection
  KmeansTuneOutcome out;
  double best_sil = -std::numeric_limits<double>::infinity();
  for (std::size_t g = 0; g < k_range.size(); ++g) {
    deadline.check();
    const std::size_t k = k_range[g];
    proximity::KMeansModel model =
        proximity::kmeans_fit(x, k, mix_seed(seed, g), 300, 1e-6, deadline);
    double sil = silhouette(x, model.assignments, false, deadline);
    out.silhouettes.emplace_back(k, sil);
    if (sil > best_sil || (sil == best_sil && k < out.best_k)) {
      best_sil = sil;
      out.best_k = k;
      out.best_model = std::move(model);
    }
  }
  return out;
}

DbscanTuneOutcome tune_dbscan(const Matrix& x,
                              const std::vector<std::size_t>& kappa_grid,
                              std::uint64_t seed, const Deadline& deadline) {
  if (kappa_grid.empty()) throw ConfigError("tune_dbscan: empty kappa grid");
  (void)seed;  // dbscan itself is deterministic

  DbscanTuneOutcome out;
  double best = -std::numeric_limits<double>::infinity();
  bool found = false;

  for (std::size_t kappa : kappa_grid) {
    deadline.check();
    auto t0 = std::chrono::steady_clock::now();

    // kappa counts the point itself, so the curve uses kappa-1 other points
    const std::size_t knn = std::max<std::size_t>(1, kappa - 1);
    DbscanTraceEntry entry;
    entry.kappa = kappa;
    entry.quality = -std::numeric_limits<double>::infinity();

    if (knn <= x.rows - 1) {
      std::vector<double> curve = hdbscan::core_distances(x, knn, deadline);
      std::sort(curve.begin(), curve.end());
      entry.epsilon = curve[knee_point(curve)];

      if (entry.epsilon > 0.0) {
        proximity::DbscanConfig cfg{entry.epsilon, kappa};
        proximity::DbscanResult run = proximity::dbscan(x, cfg, deadline);
        int nc = 0;
        for (int l : run.labels) nc = std::max(nc, l + 1);
        if (nc >= 2) {
          entry.quality = silhouette(x, run.labels, true, deadline);
          if (entry.quality > best) {
            best = entry.quality;
            out.best = cfg;
            out.best_silhouette = entry.quality;
            out.labels = run.labels;
            found = true;
          }
        }
      }
    }
    entry.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    out.trace.push_back(entry);
  }
  if (!found) {
    throw NoValidConfigError(
        "no dbscan configuration produced >= 2 clusters");
  }
  return out;
}

EvalMetrics evaluate_run(const AnomalyResult& result,
                         const std::vector<std::string>& injected_ids,
                         const std::vector<std::string>& row_ids) {
  if (result.flags.size() != row_ids.size()) {
    throw Error("evaluate_run: result size does not match row ids");
  }
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < row_ids.size(); ++i) index.emplace(row_ids[i], i);

  EvalMetrics m;
  for (const std::string& id : injected_ids) {
    auto it = index.find(id);
    if (it == index.end()) {
      throw UnknownIdError("injected id not present in scored dataset: " + id);
    }
    if (result.flags[it->second]) m.injected_found++;
  }
  m.total_flagged = result.flagged_count();
  m.flagged_fraction = row_ids.empty()
                           ? 0.0
                           : static_cast<double>(m.total_flagged) /
                                 static_cast<double>(row_ids.size());
  m.runtime_seconds = result.runtime_seconds;
  return m;
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw Error("percentile of empty vector");
  std::sort(values.begin(), values.end());
  if (values.size() == 1) return values[0];
  double pos = q / 100.0 * static_cast<double>(values.size() - 1);
  pos = std::clamp(pos, 0.0, static_cast<double>(values.size() - 1));
  std::size_t lo = static_cast<std::size_t>(pos);
  std::size_t hi = std::min(lo + 1, values.size() - 1);
  double frac = pos - static_cast<double>(lo);
  return values[lo] * (1.0 - frac) + values[hi] * frac;
}

}  // namespace anomkit::scoring
