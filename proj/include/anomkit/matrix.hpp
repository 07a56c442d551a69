#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace anomkit {

// Dense row-major matrix of doubles. The numeric view every detector works on.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const {
    return {data.data() + r * cols, cols};
  }

  bool operator==(const Matrix&) const = default;
};

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

inline double squared_distance(const Matrix& m, std::size_t i, std::size_t j) {
  return squared_distance(m.row(i), m.row(j));
}

inline double euclidean_distance(std::span<const double> a, std::span<const double> b) {
  return std::sqrt(squared_distance(a, b));
}

inline double euclidean_distance(const Matrix& m, std::size_t i, std::size_t j) {
  return std::sqrt(squared_distance(m, i, j));
}

}  // namespace anomkit
