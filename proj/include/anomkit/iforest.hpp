#pragma once

#include <cstdint>
#include <vector>

#include "anomkit/deadline.hpp"
#include "anomkit/matrix.hpp"
#include "anomkit/result.hpp"
#include "anomkit/rng.hpp"

namespace anomkit::iforest {

struct IForestConfig {
  std::size_t n_est = 100;  // tree count
  double s_max = 1.0;       // subsample fraction of n, in (0, 1]
  double f_max = 1.0;       // feature fraction per tree, in (0, 1]
  std::uint64_t seed = 0;
};

struct ITreeNode {
  int feature = -1;        // -1 marks a leaf
  double split = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::uint32_t size = 0;  // training points reaching this node (leaves)
};

struct ITree {
  std::vector<ITreeNode> nodes;  // nodes[0] is the root
  std::vector<std::size_t> features;
  std::size_t height_limit = 0;
};

struct IForestModel {
  std::vector<ITree> trees;
  std::size_t psi = 0;  // subsample size
  IForestConfig cfg;
};

// c(n): average unsuccessful-search path length in a BST of n points.
double avg_path_length(std::size_t n);

ITree build_itree(const Matrix& x, const std::vector<std::size_t>& sample,
                  const std::vector<std::size_t>& features, Rng& rng,
                  std::size_t height_limit);

// leaf depth plus c(leaf.size) for the unbuilt subtree below it
double path_length(const ITree& tree, std::span<const double> row);

IForestModel fit_iforest(const Matrix& x, const IForestConfig& cfg,
                         const Deadline& deadline = Deadline::none());

double forest_expected_path(const IForestModel& model, std::span<const double> row);

struct IForestOutcome {
  AnomalyResult result;  // score = 1 - 2*2^(-E[h]/c(psi)), flag when < 0
  double mean_score = 0.0;
};

IForestOutcome iforest_detect(const Matrix& x, const IForestConfig& cfg,
                              const Deadline& deadline = Deadline::none());

struct IForestTuneOutcome {
  IForestConfig best;
  std::size_t best_index = 0;
  std::vector<double> mean_scores;  // per grid entry
};

// Each grid entry runs with a seed derived from (master_seed, index); the
// entry with the highest dataset-mean anomaly score wins, first on ties.
IForestTuneOutcome tune_iforest(const Matrix& x,
                                const std::vector<IForestConfig>& grid,
                                std::uint64_t master_seed,
                                const Deadline& deadline = Deadline::none());

}  // namespace anomkit::iforest
