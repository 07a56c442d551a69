#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "anomkit/deadline.hpp"
#include "anomkit/matrix.hpp"
#include "anomkit/result.hpp"

namespace anomkit::hdbscan {

struct HdbscanConfig {
  std::size_t kappa = 10;           // core-distance neighbor count
  std::size_t min_cluster_size = 5;
};

struct MstEdge {
  std::size_t a = 0;
  std::size_t b = 0;
  double weight = 0.0;
};

// One condensed-tree row: `child` departs `parent` at level `lambda`.
// Children are either clusters (child_is_cluster) or single points.
struct CondensedNode {
  std::size_t parent = 0;      // cluster id
  std::size_t child = 0;       // cluster id or point index
  bool child_is_cluster = false;
  double lambda = 0.0;         // 1 / distance, +inf for zero distance
  std::size_t size = 1;
};

struct CondensedTree {
  std::vector<CondensedNode> nodes;
  std::size_t n_points = 0;
  std::size_t n_clusters = 1;  // cluster ids are 0 (root) .. n_clusters-1
};

struct SelectionResult {
  std::vector<int> labels;            // noise = -1
  std::vector<double> stability;      // per cluster id
  std::vector<std::size_t> selected;  // chosen cluster ids, an antichain
};

// Euclidean distance from each row to its kappa-th nearest other row.
std::vector<double> core_distances(const Matrix& x, std::size_t kappa,
                                   const Deadline& deadline = Deadline::none());

double mutual_reachability(const Matrix& x, const std::vector<double>& core,
                           std::size_t i, std::size_t j);

// Prim over the implicit complete mutual-reachability graph. Ties on equal
// weight break by (weight, min id, max id).
std::vector<MstEdge> build_mst(const Matrix& x, const std::vector<double>& core,
                               const Deadline& deadline = Deadline::none());

CondensedTree condense_tree(const std::vector<MstEdge>& mst, std::size_t n_points,
                            std::size_t min_cluster_size);

SelectionResult select_clusters(const CondensedTree& tree);

std::string condensed_tree_json(const CondensedTree& tree);

// Full pipeline; noise points are the anomalies.
struct HdbscanOutput {
  std::vector<int> labels;
  CondensedTree tree;
  SelectionResult selection;
};
HdbscanOutput hdbscan_fit(const Matrix& x, const HdbscanConfig& cfg,
                          const Deadline& deadline = Deadline::none());
AnomalyResult hdbscan_detect(const Matrix& x, const HdbscanConfig& cfg,
                             const Deadline& deadline = Deadline::none());

}  // namespace anomkit::hdbscan
