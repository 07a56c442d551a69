#include "anomkit/synthetic.hpp"

#include "anomkit/errors.hpp"
#include "anomkit/rng.hpp"

namespace anomkit::synthetic {

Dataset make_mixture_dataset(const MixtureSpec& spec) {
  if (spec.n_features < 2 || spec.n_rows < spec.n_clusters || spec.n_clusters < 1) {
    throw ConfigError("mixture spec needs >= 2 features and n_rows >= n_clusters");
  }

  Dataset ds;
  ds.schema.push_back({"id", ColumnKind::Identifier, ""});
  for (std::size_t f = 0; f < spec.n_features; ++f) {
    ds.schema.push_back({"f" + std::to_string(f), ColumnKind::Continuous, ""});
  }

  Rng rng(spec.seed);
  const std::size_t k = spec.n_clusters;
  for (std::size_t r = 0; r < spec.n_rows; ++r) {
    const std::size_t cluster = r % k;
    // cluster offsets spread symmetrically around zero
    const double offset =
        k == 1 ? 0.0
               : (static_cast<double>(cluster) - static_cast<double>(k - 1) / 2.0) *
                     2.0 / static_cast<double>(k - 1);

    std::vector<Cell> row(ds.schema.size());
    row[0] = Cell::text("row-" + std::to_string(r));

    // feature 0 drives feature 1; every feature carries cluster structure
    // with per-feature strength so no column is pure noise. Center signs
    // alternate so no single direction aligns with all features at once.
    double f0 = 0.0;
    for (std::size_t f = 0; f < spec.n_features; ++f) {
      const double strength =
          spec.center_scale * (1.0 + static_cast<double>(f % 5) * 0.25) *
          (f % 2 == 0 ? 1.0 : -1.0);
      double v;
      if (f == 1) {
        v = f0 + rng.normal() * 0.3 * spec.cluster_spread;
      } else {
        v = strength * offset + rng.normal() * spec.cluster_spread;
        if (f == 0) f0 = v;
      }
      row[f + 1] = Cell::number(v);
    }
    ds.rows.push_back(std::move(row));
    ds.row_ids.push_back("row-" + std::to_string(r));
  }
  return ds;
}

}  // namespace anomkit::synthetic
