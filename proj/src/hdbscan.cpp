#include "anomkit/hdbscan.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>

#include "anomkit/errors.hpp"

namespace anomkit::hdbscan {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double to_lambda(double distance) {
  return distance > 0.0 ? 1.0 / distance : kInf;
}

}  // namespace

std::vector<double> core_distances(const Matrix& x, std::size_t kappa,
                                   const Deadline& deadline) {
  const std::size_t n = x.rows;
  if (kappa < 1 || kappa > n - 1) {
    throw KTooLargeError("core distance kappa must be in [1, n-1], got " +
                         std::to_string(kappa));
  }
  std::vector<double> core(n);
  std::vector<double> heap(kappa);  // max-heap of kappa smallest d^2
  for (std::size_t i = 0; i < n; ++i) {
    if ((i & 0x3F) == 0) deadline.check();
    std::size_t filled = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      double d2 = squared_distance(x, i, j);
      if (filled < kappa) {
        heap[filled++] = d2;
        if (filled == kappa) std::make_heap(heap.begin(), heap.end());
      } else if (d2 < heap.front()) {
        std::pop_heap(heap.begin(), heap.end());
        heap.back() = d2;
        std::push_heap(heap.begin(), heap.end());
      }
    }
    core[i] = std::sqrt(heap.front());
  }
  return core;
}

double mutual_reachability(const Matrix& x, const std::vector<double>& core,
                           std::size_t i, std::size_t j) {
  return std::max({core[i], core[j], euclidean_distance(x, i, j)});
}

std::vector<MstEdge> build_mst(const Matrix& x, const std::vector<double>& core,
                               const Deadline& deadline) {
  const std::size_t n = x.rows;
  if (n < 2) throw Error("build_mst needs at least 2 rows");

  std::vector<bool> in_tree(n, false);
  std::vector<double> best_w(n, kInf);
  std::vector<std::size_t> best_from(n, 0);
  std::vector<MstEdge> edges;
  edges.reserve(n - 1);

  std::size_t current = 0;
  in_tree[0] = true;
  for (std::size_t step = 0; step + 1 < n; ++step) {
    deadline.check();
    for (std::size_t j = 0; j < n; ++j) {
      if (in_tree[j]) continue;
      double w = mutual_reachability(x, core, current, j);
      if (w < best_w[j]) {
        best_w[j] = w;
        best_from[j] = current;
      }
    }
    // next vertex: lexicographic (weight, min endpoint, max endpoint)
    std::size_t pick = n;
    for (std::size_t j = 0; j < n; ++j) {
      if (in_tree[j]) continue;
      if (pick == n) {
        pick = j;
        continue;
      }
      double wa = best_w[j], wb = best_w[pick];
      if (wa != wb) {
        if (wa < wb) pick = j;
        continue;
      }
      auto key = [&](std::size_t v) {
        return std::pair(std::min(v, best_from[v]), std::max(v, best_from[v]));
      };
      if (key(j) < key(pick)) pick = j;
    }
    edges.push_back({std::min(pick, best_from[pick]),
                     std::max(pick, best_from[pick]), best_w[pick]});
    in_tree[pick] = true;
    current = pick;
  }
  return edges;
}

namespace {

// single-linkage dendrogram node; ids 0..n-1 are points, n.. are merges
struct DendroNode {
  std::size_t left = 0;
  std::size_t right = 0;
  double height = 0.0;
  std::size_t size = 1;
};

struct Dendrogram {
  std::size_t n = 0;
  std::vector<DendroNode> merges;  // merges[i] has id n + i
  std::size_t size_of(std::size_t id) const {
    return id < n ? 1 : merges[id - n].size;
  }
  std::size_t root() const { return n + merges.size() - 1; }

  // append the point indices below `id` to out (iterative)
  void collect_points(std::size_t id, std::vector<std::size_t>& out) const {
    std::vector<std::size_t> stack{id};
    while (!stack.empty()) {
      std::size_t v = stack.back();
      stack.pop_back();
      if (v < n) {
        out.push_back(v);
      } else {
        stack.push_back(merges[v - n].left);
        stack.push_back(merges[v - n].right);
      }
    }
  }
};

Dendrogram single_linkage(const std::vector<MstEdge>& mst, std::size_t n) {
  std::vector<MstEdge> edges = mst;
  std::sort(edges.begin(), edges.end(), [](const MstEdge& a, const MstEdge& b) {
    if (a.weight != b.weight) return a.weight < b.weight;
    if (a.a != b.a) return a.a < b.a;
    return a.b < b.b;
  });

  Dendrogram dg;
  dg.n = n;
  std::vector<std::size_t> parent(2 * n - 1);
  std::iota(parent.begin(), parent.end(), 0);
  std::vector<std::size_t> rep(n);  // current dendrogram node per root
  std::iota(rep.begin(), rep.end(), 0);

  std::function<std::size_t(std::size_t)> find = [&](std::size_t v) {
    while (parent[v] != v) {
      parent[v] = parent[parent[v]];
      v = parent[v];
    }
    return v;
  };

  for (const MstEdge& e : edges) {
    std::size_t ra = find(e.a);
    std::size_t rb = find(e.b);
    DendroNode node;
    node.left = rep[ra];
    node.right = rep[rb];
    node.height = e.weight;
    node.size = dg.size_of(node.left) + dg.size_of(node.right);
    dg.merges.push_back(node);
    std::size_t id = dg.n + dg.merges.size() - 1;
    parent[ra] = rb;
    rep[rb] = id;
  }
  return dg;
}

}  // namespace

CondensedTree condense_tree(const std::vector<MstEdge>& mst, std::size_t n_points,
                            std::size_t min_cluster_size) {
  if (mst.size() + 1 != n_points) {
    throw Error("condense_tree: MST edge count does not match point count");
  }
  if (min_cluster_size < 2) {
    throw Error("min_cluster_size must be >= 2");
  }

  Dendrogram dg = single_linkage(mst, n_points);
  CondensedTree tree;
  tree.n_points = n_points;

  // walk the binary dendrogram from the root, pruning small sides
  struct Item {
    std::size_t node;     // dendrogram id
    std::size_t cluster;  // condensed cluster id it belongs to
  };
  std::vector<Item> stack{{dg.root(), 0}};
  std::vector<std::size_t> points;

  auto fall_out = [&](std::size_t subtree, std::size_t cluster, double lambda) {
    points.clear();
    dg.collect_points(subtree, points);
    std::sort(points.begin(), points.end());
    for (std::size_t p : points) {
      tree.nodes.push_back({cluster, p, false, lambda, 1});
    }
  };

  while (!stack.empty()) {
    Item item = stack.back();
    stack.pop_back();
    // only subtrees with >= min_cluster_size >= 2 points are pushed,
    // so item.node is always an internal merge node
    const DendroNode& nd = dg.merges[item.node - dg.n];
    const double lambda = to_lambda(nd.height);
    const std::size_t ls = dg.size_of(nd.left);
    const std::size_t rs = dg.size_of(nd.right);
    const bool left_big = ls >= min_cluster_size;
    const bool right_big = rs >= min_cluster_size;

    if (left_big && right_big) {
      std::size_t cl = tree.n_clusters++;
      tree.nodes.push_back({item.cluster, cl, true, lambda, ls});
      std::size_t cr = tree.n_clusters++;
      tree.nodes.push_back({item.cluster, cr, true, lambda, rs});
      stack.push_back({nd.right, cr});
      stack.push_back({nd.left, cl});
    } else if (left_big) {
      fall_out(nd.right, item.cluster, lambda);
      stack.push_back({nd.left, item.cluster});
    } else if (right_big) {
      fall_out(nd.left, item.cluster, lambda);
      stack.push_back({nd.right, item.cluster});
    } else {
      fall_out(nd.left, item.cluster, lambda);
      fall_out(nd.right, item.cluster, lambda);
    }
  }
  return tree;
}

SelectionResult select_clusters(const CondensedTree& tree) {
  const std::size_t nc = tree.n_clusters;
  std::vector<double> birth(nc, 0.0);
  std::vector<std::vector<std::size_t>> children(nc);
  for (const auto& node : tree.nodes) {
    if (node.child_is_cluster) {
      birth[node.child] = node.lambda;
      children[node.parent].push_back(node.child);
    }
  }

  SelectionResult res;
  res.stability.assign(nc, 0.0);
  for (const auto& node : tree.nodes) {
    double depart = node.lambda;
    double contribution =
        (depart - birth[node.parent]) * static_cast<double>(node.size);
    res.stability[node.parent] += contribution;
  }

  // bottom-up: a parent survives only if it beats the sum of its children
  std::vector<double> subtree_stab(nc, 0.0);
  std::vector<bool> selected(nc, false);
  for (std::size_t c = nc; c-- > 0;) {
    if (children[c].empty()) {
      subtree_stab[c] = res.stability[c];
      selected[c] = true;
      continue;
    }
    double child_sum = 0.0;
    for (std::size_t ch : children[c]) child_sum += subtree_stab[ch];
    if (res.stability[c] > child_sum) {
      selected[c] = true;
      subtree_stab[c] = res.stability[c];
    } else {
      subtree_stab[c] = child_sum;
    }
  }

  // extract the antichain: highest selected cluster on each root path wins
  std::vector<bool> final_selected(nc, false);
  std::vector<std::size_t> walk{0};
  if (selected[0]) {
    final_selected[0] = true;
  } else {
    while (!walk.empty()) {
      std::size_t c = walk.back();
      walk.pop_back();
      for (std::size_t ch : children[c]) {
        if (selected[ch]) {
          final_selected[ch] = true;
        } else {
          walk.push_back(ch);
        }
      }
    }
  }
  for (std::size_t c = 0; c < nc; ++c) {
    if (final_selected[c]) res.selected.push_back(c);
  }

  // label points: walk up from the fall-out parent to a selected cluster
  std::vector<std::size_t> parent_of(nc, 0);
  for (const auto& node : tree.nodes) {
    if (node.child_is_cluster) parent_of[node.child] = node.parent;
  }
  std::vector<int> cluster_label(nc, -1);
  for (std::size_t idx = 0; idx < res.selected.size(); ++idx) {
    cluster_label[res.selected[idx]] = static_cast<int>(idx);
  }

  res.labels.assign(tree.n_points, -1);
  for (const auto& node : tree.nodes) {
    if (node.child_is_cluster) continue;
    std::size_t c = node.parent;
    int label = -1;
    for (;;) {
      if (cluster_label[c] != -1) {
        label = cluster_label[c];
        break;
      }
      if (c == 0) break;
      c = parent_of[c];
    }
    res.labels[node.child] = label;
  }
  return res;
}

std::string condensed_tree_json(const CondensedTree& tree) {
  std::ostringstream out;
  out << "{\"n_points\": " << tree.n_points
      << ", \"n_clusters\": " << tree.n_clusters << ", \"nodes\": [";
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    const auto& n = tree.nodes[i];
    if (i) out << ", ";
    out << "{\"parent\": " << n.parent << ", \"child\": " << n.child
        << ", \"child_is_cluster\": " << (n.child_is_cluster ? "true" : "false")
        << ", \"lambda\": ";
    if (std::isinf(n.lambda)) out << "\"inf\"";
    else out << n.lambda;
    out << ", \"size\": " << n.size << "}";
  }
  out << "]}";
  return out.str();
}

HdbscanOutput hdbscan_fit(const Matrix& x, const HdbscanConfig& cfg,
                          const Deadline& deadline) {
  HdbscanOutput out;
  auto core = core_distances(x, cfg.kappa, deadline);
  auto mst = build_mst(x, core, deadline);
  out.tree = condense_tree(mst, x.rows, cfg.min_cluster_size);
  out.selection = select_clusters(out.tree);
  out.labels = out.selection.labels;
  return out;
}

AnomalyResult hdbscan_detect(const Matrix& x, const HdbscanConfig& cfg,
                             const Deadline& deadline) {
  HdbscanOutput out = hdbscan_fit(x, cfg, deadline);
  AnomalyResult res;
  res.method = "hdbscan";
  res.scores.resize(x.rows);
  res.flags.resize(x.rows);
  res.threshold = 0.5;
  for (std::size_t i = 0; i < x.rows; ++i) {
    bool noise = out.labels[i] == -1;
    res.scores[i] = noise ? 1.0 : 0.0;
    res.flags[i] = noise;
  }
  return res;
}

}  // namespace anomkit::hdbscan
