#include "anomkit/iforest.hpp"

#include <algorithm>
#include <cmath>

#include "anomkit/errors.hpp"

namespace anomkit::iforest {

namespace {

constexpr double kEulerMascheroni = 0.5772156649;

std::size_t height_limit_for(std::size_t psi) {
  return static_cast<std::size_t>(
      std::ceil(std::log2(static_cast<double>(psi))));
}

}  // namespace

double avg_path_length(std::size_t n) {
  if (n <= 1) return 0.0;
  if (n == 2) return 1.0;
  double nd = static_cast<double>(n);
  return 2.0 * (std::log(nd - 1.0) + kEulerMascheroni) -
         2.0 * (nd - 1.0) / nd;
}

namespace {

// recursive builder over an index slice, partitioned in place
std::int32_t build_node(const Matrix& x, std::vector<std::size_t>& idx,
                        std::size_t begin, std::size_t end,
                        const std::vector<std::size_t>& features, Rng& rng,
                        std::size_t depth, std::size_t height_limit,
                        std::vector<ITreeNode>& nodes) {
  const std::size_t count = end - begin;
  if (count == 1 || depth >= height_limit) {
    nodes.push_back({-1, 0.0, -1, -1, static_cast<std::uint32_t>(count)});
    return static_cast<std::int32_t>(nodes.size() - 1);
  }

  // splittable features: min < max on this slice
  std::vector<std::size_t> usable;
  usable.reserve(features.size());
  for (std::size_t f : features) {
    double lo = x(idx[begin], f), hi = lo;
    for (std::size_t t = begin + 1; t < end; ++t) {
      lo = std::min(lo, x(idx[t], f));
      hi = std::max(hi, x(idx[t], f));
    }
    if (hi > lo) usable.push_back(f);
  }
  if (usable.empty()) {  // all-identical slice
    nodes.push_back({-1, 0.0, -1, -1, static_cast<std::uint32_t>(count)});
    return static_cast<std::int32_t>(nodes.size() - 1);
  }

  const std::size_t feature = usable[rng.uniform_index(usable.size())];
  double lo = x(idx[begin], feature), hi = lo;
  for (std::size_t t = begin + 1; t < end; ++t) {
    lo = std::min(lo, x(idx[t], feature));
    hi = std::max(hi, x(idx[t], feature));
  }
  const double split = rng.uniform_open(lo, hi);

  std::size_t mid = begin;
  for (std::size_t t = begin; t < end; ++t) {
    if (x(idx[t], feature) < split) std::swap(idx[mid++], idx[t]);
  }

  nodes.push_back({static_cast<int>(feature), split, -1, -1, 0});
  const std::int32_t self = static_cast<std::int32_t>(nodes.size() - 1);
  std::int32_t left = build_node(x, idx, begin, mid, features, rng, depth + 1,
                                 height_limit, nodes);
  std::int32_t right = build_node(x, idx, mid, end, features, rng, depth + 1,
                                  height_limit, nodes);
  nodes[static_cast<std::size_t>(self)].left = left;
  nodes[static_cast<std::size_t>(self)].right = right;
  return self;
}

}  // namespace

ITree build_itree(const Matrix& x, const std::vector<std::size_t>& sample,
                  const std::vector<std::size_t>& features, Rng& rng,
                  std::size_t height_limit) {
  if (sample.empty()) throw Error("build_itree: empty sample");
  ITree tree;
  tree.features = features;
  tree.height_limit = height_limit;
  std::vector<std::size_t> idx = sample;
  build_node(x, idx, 0, idx.size(), features, rng, 0, height_limit, tree.nodes);
  return tree;
}

double path_length(const ITree& tree, std::span<const double> row) {
  std::size_t node = 0;
  double depth = 0.0;
  for (;;) {
    const ITreeNode& nd = tree.nodes[node];
    if (nd.feature < 0) {
      return depth + avg_path_length(nd.size);
    }
    depth += 1.0;
    node = static_cast<std::size_t>(
        row[static_cast<std::size_t>(nd.feature)] < nd.split ? nd.left : nd.right);
  }
}

IForestModel fit_iforest(const Matrix& x, const IForestConfig& cfg,
                         const Deadline& deadline) {
  const std::size_t n = x.rows;
  const std::size_t d = x.cols;
  if (n == 0 || d == 0) throw Error("fit_iforest: empty dataset");
  if (cfg.s_max <= 0.0 || cfg.s_max > 1.0 || cfg.f_max <= 0.0 || cfg.f_max > 1.0) {
    throw ConfigError("s_max and f_max must lie in (0, 1]");
  }
  const std::size_t psi = static_cast<std::size_t>(
      std::llround(cfg.s_max * static_cast<double>(n)));
  if (psi < 2) {
    throw SampleTooSmallError("subsample size " + std::to_string(psi) +
                              " is below 2");
  }
  std::size_t n_features = static_cast<std::size_t>(
      std::llround(cfg.f_max * static_cast<double>(d)));
  n_features = std::clamp<std::size_t>(n_features, 1, d);

  IForestModel model;
  model.cfg = cfg;
  model.psi = psi;
  model.trees.reserve(cfg.n_est);
  const std::size_t limit = height_limit_for(psi);

  for (std::size_t t = 0; t < cfg.n_est; ++t) {
    deadline.check();
    Rng rng(mix_seed(cfg.seed, t));
    std::vector<std::size_t> sample = rng.sample_indices(n, psi);
    std::vector<std::size_t> features = rng.sample_indices(d, n_features);
    std::sort(features.begin(), features.end());
    model.trees.push_back(build_itree(x, sample, features, rng, limit));
  }
  return model;
}

double forest_expected_path(const IForestModel& model,
                            std::span<const double> row) {
  double sum = 0.0;
  for (const ITree& tree : model.trees) sum += path_length(tree, row);
  return sum / static_cast<double>(model.trees.size());
}

IForestOutcome iforest_detect(const Matrix& x, const IForestConfig& cfg,
                              const Deadline& deadline) {
  IForestModel model = fit_iforest(x, cfg, deadline);
  const double norm = avg_path_length(model.psi);

  IForestOutcome out;
  out.result.method = "iforest";
  out.result.threshold = 0.0;  // negative scores are anomalies
  out.result.scores.resize(x.rows);
  out.result.flags.resize(x.rows);
  double total = 0.0;
  for (std::size_t i = 0; i < x.rows; ++i) {
    if ((i & 0xFF) == 0) deadline.check();
    double eh = forest_expected_path(model, x.row(i));
    double s = std::exp2(-eh / norm);   // classic score in (0, 1]
    double score = 1.0 - 2.0 * s;       // mapped to (-1, 1), negative = anomaly
    out.result.scores[i] = score;
    out.result.flags[i] = score < 0.0;
    total += score;
  }
  out.mean_score = total / static_cast<double>(x.rows);
  return out;
}

IForestTuneOutcome tune_iforest(const Matrix& x,
                                const std::vector<IForestConfig>& grid,
                                std::uint64_t master_seed,
                                const Deadline& deadline) {
  if (grid.empty()) throw ConfigError("tune_iforest: empty grid");
  IForestTuneOutcome out;
  out.mean_scores.reserve(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    IForestConfig cfg = grid[g];
    cfg.seed = mix_seed(master_seed, g);
    IForestOutcome run = iforest_detect(x, cfg, deadline);
    out.mean_scores.push_back(run.mean_score);
    if (g == 0 || run.mean_score > out.mean_scores[out.best_index]) {
      out.best = cfg;
      out.best_index = g;
    }
  }
  return out;
}

}  // namespace anomkit::iforest
