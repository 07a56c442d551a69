#include "anomkit/ocsvm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <list>
#include <unordered_map>

#include "anomkit/errors.hpp"

namespace anomkit::ocsvm {

double rbf_kernel(std::span<const double> x, std::span<const double> y,
                  double gamma) {
  return std::exp(-gamma * squared_distance(x, y));
}

namespace {

// Kernel columns, fully materialized for small n, LRU-cached above that.
class KernelSource {
 public:
  KernelSource(const Matrix& x, double gamma) : x_(x), gamma_(gamma) {
    if (x.rows <= kDenseLimit) {
      dense_.assign(x.rows * x.rows, 0.0);
      for (std::size_t i = 0; i < x.rows; ++i) {
        dense_[i * x.rows + i] = 1.0;
        for (std::size_t j = i + 1; j < x.rows; ++j) {
          double v = rbf_kernel(x.row(i), x.row(j), gamma_);
          dense_[i * x.rows + j] = v;
          dense_[j * x.rows + i] = v;
        }
      }
    }
  }

  std::span<const double> column(std::size_t i) {
    if (!dense_.empty()) return {dense_.data() + i * x_.rows, x_.rows};
    auto it = cache_.find(i);
    if (it != cache_.end()) {
      order_.splice(order_.begin(), order_, it->second.second);
      return {it->second.first.data(), x_.rows};
    }
    std::vector<double> col(x_.rows);
    for (std::size_t j = 0; j < x_.rows; ++j) {
      col[j] = j == i ? 1.0 : rbf_kernel(x_.row(i), x_.row(j), gamma_);
    }
    if (cache_.size() >= kCacheCols) {
      cache_.erase(order_.back());
      order_.pop_back();
    }
    order_.push_front(i);
    auto [pos, ok] = cache_.emplace(i, std::pair(std::move(col), order_.begin()));
    (void)ok;
    return {pos->second.first.data(), x_.rows};
  }

 private:
  static constexpr std::size_t kDenseLimit = 3000;
  static constexpr std::size_t kCacheCols = 256;
  const Matrix& x_;
  double gamma_;
  std::vector<double> dense_;
  std::unordered_map<std::size_t,
                     std::pair<std::vector<double>, std::list<std::size_t>::iterator>>
      cache_;
  std::list<std::size_t> order_;
};

}  // namespace

OcsvmModel fit_ocsvm(const Matrix& x, const OcsvmConfig& cfg,
                     const Deadline& deadline) {
  const std::size_t n = x.rows;
  if (n < 2) throw Error("fit_ocsvm needs at least 2 rows");
  if (cfg.nu <= 0.0 || cfg.nu > 1.0) {
    throw ConfigError("nu must lie in (0, 1]");
  }
  const double gamma =
      cfg.gamma > 0.0 ? cfg.gamma : 1.0 / static_cast<double>(x.cols);
  const double box = 1.0 / (cfg.nu * static_cast<double>(n));

  OcsvmModel model;
  model.gamma = gamma;
  model.train = x;
  model.alpha.assign(n, 0.0);

  // feasible start: fill the first floor(nu*n) coefficients to the box,
  // the fractional remainder goes to the next one
  const double nf = cfg.nu * static_cast<double>(n);
  const std::size_t full = static_cast<std::size_t>(nf);
  for (std::size_t i = 0; i < full && i < n; ++i) model.alpha[i] = box;
  if (full < n) {
    model.alpha[full] = (nf - static_cast<double>(full)) * box;
  }

  KernelSource kernel(x, gamma);

  // gradient of 1/2 a^T K a is K a
  std::vector<double> grad(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (model.alpha[i] == 0.0) continue;
    auto col = kernel.column(i);
    for (std::size_t j = 0; j < n; ++j) grad[j] += model.alpha[i] * col[j];
  }

  double violation = std::numeric_limits<double>::infinity();
  for (std::size_t iter = 0; iter < cfg.max_iter; ++iter) {
    if ((iter & 0xFF) == 0) deadline.check();

    // maximal violating pair: raise alpha where the gradient is smallest,
    // lower it where the gradient is largest
    std::size_t up = n, low = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (model.alpha[i] < box && (up == n || grad[i] < grad[up])) up = i;
      if (model.alpha[i] > 0.0 && (low == n || grad[i] > grad[low])) low = i;
    }
    if (up == n || low == n) break;
    violation = grad[low] - grad[up];
    if (violation < cfg.tol) break;

    auto col_up = kernel.column(up);
    auto col_low = kernel.column(low);
    const double eta = 2.0 - 2.0 * col_up[low];  // K_ii = K_jj = 1 for RBF
    double step = eta > 1e-12 ? violation / eta
                              : std::numeric_limits<double>::infinity();
    step = std::min({step, box - model.alpha[up], model.alpha[low]});
    if (step <= 0.0) break;

    model.alpha[up] = std::min(model.alpha[up] + step, box);
    model.alpha[low] = std::max(model.alpha[low] - step, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      grad[j] += step * (col_up[j] - col_low[j]);
    }
  }
  model.final_violation = violation;
  model.converged = violation <= 10.0 * cfg.tol;

  for (std::size_t i = 0; i < n; ++i) {
    if (model.alpha[i] > 0.0) model.support.push_back(i);
  }

  // rho: mean gradient over free support vectors, midpoint fallback
  double free_sum = 0.0;
  std::size_t free_count = 0;
  for (std::size_t i : model.support) {
    if (model.alpha[i] < box) {
      free_sum += grad[i];
      ++free_count;
    }
  }
  if (free_count > 0) {
    model.rho = free_sum / static_cast<double>(free_count);
  } else {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      if (model.alpha[i] < box) lo = std::min(lo, grad[i]);
      if (model.alpha[i] > 0.0) hi = std::max(hi, grad[i]);
    }
    model.rho = 0.5 * (lo + hi);
  }
  return model;
}

std::pair<double, int> ocsvm_decision(const OcsvmModel& model,
                                      std::span<const double> q) {
  double s = 0.0;
  for (std::size_t i : model.support) {
    s += model.alpha[i] * rbf_kernel(model.train.row(i), q, model.gamma);
  }
  s -= model.rho;
  return {s, s >= 0.0 ? +1 : -1};
}

AnomalyResult ocsvm_detect(const Matrix& x, const OcsvmConfig& cfg,
                           const Deadline& deadline) {
  OcsvmModel model = fit_ocsvm(x, cfg, deadline);
  AnomalyResult res;
  res.method = "ocsvm";
  res.threshold = 0.0;  // anomalies score below zero
  res.scores.resize(x.rows);
  res.flags.resize(x.rows);
  for (std::size_t i = 0; i < x.rows; ++i) {
    if ((i & 0xFF) == 0) deadline.check();
    auto [score, label] = ocsvm_decision(model, x.row(i));
    res.scores[i] = score;
    res.flags[i] = label < 0;
  }
  return res;
}

}  // namespace anomkit::ocsvm
