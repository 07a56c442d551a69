#pragma once

#include <cstdint>

#include "anomkit/dataset.hpp"

namespace anomkit::synthetic {

// Gaussian mixture with cluster structure across all features plus one
// strongly correlated feature pair (column 1 tracks column 0). Used by the
// synthetic benchmarks and the end-to-end tests.
struct MixtureSpec {
  std::size_t n_rows = 1000;
  std::size_t n_features = 13;
  std::size_t n_clusters = 3;
  double cluster_spread = 1.0;
  double center_scale = 4.0;
  std::uint64_t seed = 0;
};

Dataset make_mixture_dataset(const MixtureSpec& spec);

}  // namespace anomkit::synthetic
