#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "anomkit/dataset.hpp"
#include "anomkit/matrix.hpp"
#include "anomkit/rng.hpp"

namespace testsupport {

inline anomkit::Matrix random_matrix(std::size_t rows, std::size_t cols,
                                     std::uint64_t seed, double scale = 1.0) {
  anomkit::Rng rng(seed);
  anomkit::Matrix m(rows, cols);
  for (double& v : m.data) v = rng.normal() * scale;
  return m;
}

inline anomkit::Matrix matrix_from(const std::vector<std::vector<double>>& rows) {
  anomkit::Matrix m(rows.size(), rows.empty() ? 0 : rows[0].size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) m(r, c) = rows[r][c];
  }
  return m;
}

inline anomkit::Matrix column_vector(const std::vector<double>& values) {
  anomkit::Matrix m(values.size(), 1);
  for (std::size_t i = 0; i < values.size(); ++i) m(i, 0) = values[i];
  return m;
}

// numeric dataset wrapping a matrix, ids row-0, row-1, ...
inline anomkit::Dataset dataset_from(const anomkit::Matrix& m) {
  anomkit::Dataset ds;
  ds.schema.push_back({"id", anomkit::ColumnKind::Identifier, ""});
  for (std::size_t c = 0; c < m.cols; ++c) {
    ds.schema.push_back(
        {"f" + std::to_string(c), anomkit::ColumnKind::Continuous, ""});
  }
  for (std::size_t r = 0; r < m.rows; ++r) {
    std::vector<anomkit::Cell> row(m.cols + 1);
    row[0] = anomkit::Cell::text("row-" + std::to_string(r));
    for (std::size_t c = 0; c < m.cols; ++c) {
      row[c + 1] = anomkit::Cell::number(m(r, c));
    }
    ds.rows.push_back(std::move(row));
    ds.row_ids.push_back("row-" + std::to_string(r));
  }
  return ds;
}

}  // namespace testsupport
