#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "anomkit/deadline.hpp"
#include "anomkit/matrix.hpp"
#include "anomkit/result.hpp"

namespace anomkit::ocsvm {

struct OcsvmConfig {
  double nu = 0.1;        // in (0, 1]; bounds the training anomaly fraction
  double gamma = 0.0;     // RBF width; 0 means 1/d
  double tol = 1e-4;      // KKT violation tolerance
  std::size_t max_iter = 10000;  // pairwise updates
};

struct OcsvmModel {
  std::vector<double> alpha;  // n dual coefficients, 0 <= a_i <= 1/(nu n)
  double rho = 0.0;
  std::vector<std::size_t> support;  // indices with alpha > 0
  double gamma = 0.0;
  bool converged = true;
  double final_violation = 0.0;
  Matrix train;  // training rows, needed for kernel evaluations
};

double rbf_kernel(std::span<const double> x, std::span<const double> y,
                  double gamma);

// Solves min 1/2 a^T K a  s.t.  0 <= a_i <= 1/(nu n), sum a = 1 by
// maximal-violating-pair coordinate updates with exact 2-variable steps.
// Hitting max_iter with violation > 10*tol marks the model unconverged;
// the model is still returned.
OcsvmModel fit_ocsvm(const Matrix& x, const OcsvmConfig& cfg,
                     const Deadline& deadline = Deadline::none());

// score = sum_i a_i K(x_i, q) - rho; label +1 when score >= 0, else -1.
std::pair<double, int> ocsvm_decision(const OcsvmModel& model,
                                      std::span<const double> q);

AnomalyResult ocsvm_detect(const Matrix& x, const OcsvmConfig& cfg,
                           const Deadline& deadline = Deadline::none());

}  // namespace anomkit::ocsvm
