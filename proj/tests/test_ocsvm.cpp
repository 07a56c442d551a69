#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "anomkit/errors.hpp"
#include "anomkit/ocsvm.hpp"
#include "anomkit/rng.hpp"
#include "support.hpp"

using namespace anomkit;
using namespace anomkit::ocsvm;
using testsupport::random_matrix;

namespace {

// slow reference solver: projected gradient on the box-constrained simplex
// {0 <= a <= C, sum a = 1}; projection via bisection on the shift
struct RefQp {
  std::vector<double> alpha;
  double objective = 0.0;
};

std::vector<double> project_box_simplex(std::vector<double> v, double box) {
  double lo = *std::min_element(v.begin(), v.end()) - box - 1.0;
  double hi = *std::max_element(v.begin(), v.end()) + 1.0;
  auto mass = [&](double tau) {
    double s = 0.0;
    for (double t : v) s += std::clamp(t - tau, 0.0, box);
    return s;
  };
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mass(mid) > 1.0) lo = mid;
    else hi = mid;
  }
  double tau = 0.5 * (lo + hi);
  for (double& t : v) t = std::clamp(t - tau, 0.0, box);
  return v;
}

RefQp reference_qp(const Matrix& x, double nu, double gamma, int iters) {
  const std::size_t n = x.rows;
  const double box = 1.0 / (nu * static_cast<double>(n));
  std::vector<double> kernel(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      kernel[i * n + j] = rbf_kernel(x.row(i), x.row(j), gamma);
    }
  }
  // power iteration for a step size
  std::vector<double> v(n, 1.0), kv(n);
  double lambda = 1.0;
  for (int it = 0; it < 100; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += kernel[i * n + j] * v[j];
      kv[i] = s;
    }
    lambda = std::sqrt(std::inner_product(kv.begin(), kv.end(), kv.begin(), 0.0));
    for (std::size_t i = 0; i < n; ++i) v[i] = kv[i] / lambda;
  }
  const double step = 1.0 / lambda;

  std::vector<double> alpha(n, 1.0 / static_cast<double>(n));
  alpha = project_box_simplex(alpha, box);
  std::vector<double> grad(n);
  for (int it = 0; it < iters; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += kernel[i * n + j] * alpha[j];
      grad[i] = s;
    }
    for (std::size_t i = 0; i < n; ++i) alpha[i] -= step * grad[i];
    alpha = project_box_simplex(alpha, box);
  }

  RefQp out;
  out.alpha = alpha;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      out.objective += 0.5 * alpha[i] * alpha[j] * kernel[i * n + j];
    }
  }
  return out;
}

double dual_objective(const OcsvmModel& model) {
  double obj = 0.0;
  for (std::size_t i : model.support) {
    for (std::size_t j : model.support) {
      obj += 0.5 * model.alpha[i] * model.alpha[j] *
             rbf_kernel(model.train.row(i), model.train.row(j), model.gamma);
    }
  }
  return obj;
}

}  // namespace

TEST_CASE("rbf_kernel closed-form values") {
  std::vector<double> x{0.0, 0.0}, y{1.0, 1.0};  // squared distance 2
  CHECK(rbf_kernel(x, x, 0.7) == 1.0);
  CHECK(rbf_kernel(x, y, 0.5) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  CHECK(std::fabs(rbf_kernel(x, y, 0.5) - 0.36788) < 1e-5);

  // strictly decreasing in the distance
  std::vector<double> z{2.0, 2.0};
  CHECK(rbf_kernel(x, y, 0.5) > rbf_kernel(x, z, 0.5));
}

TEST_CASE("fit_ocsvm produces a feasible dual solution") {
  Matrix x = random_matrix(50, 3, 42);
  OcsvmConfig cfg;
  cfg.nu = 0.2;
  cfg.gamma = 0.5;
  OcsvmModel model = fit_ocsvm(x, cfg);

  const double box = 1.0 / (cfg.nu * 50.0);
  double sum = 0.0;
  for (double a : model.alpha) {
    CHECK(a >= 0.0);
    CHECK(a <= box);
    sum += a;
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(model.converged);
}

TEST_CASE("duplicate rows receive equal coefficients up to tolerance") {
  // two distinct locations, each duplicated many times
  Matrix x(20, 2);
  for (std::size_t i = 0; i < 20; ++i) {
    x(i, 0) = i < 10 ? 0.0 : 3.0;
    x(i, 1) = i < 10 ? 0.0 : 1.0;
  }
  OcsvmConfig cfg;
  cfg.nu = 0.5;
  cfg.gamma = 0.3;
  cfg.tol = 1e-8;
  cfg.max_iter = 200000;
  OcsvmModel model = fit_ocsvm(x, cfg);

  // by symmetry of the dual, any spread within a duplicate group keeps the
  // decision values equal; check group scores instead of raw alphas
  auto [s_a, l_a] = ocsvm_decision(model, x.row(0));
  auto [s_b, l_b] = ocsvm_decision(model, x.row(5));
  CHECK(s_a == doctest::Approx(s_b).epsilon(1e-9));
}

TEST_CASE("smo dual objective matches the projected-gradient reference") {
  anomkit::Rng rng(77);
  Matrix x(30, 2);
  for (double& v : x.data) v = rng.normal() * 0.5;
  OcsvmConfig cfg;
  cfg.nu = 0.1;
  cfg.gamma = 1.0;
  cfg.tol = 1e-7;
  cfg.max_iter = 500000;
  OcsvmModel model = fit_ocsvm(x, cfg);
  RefQp ref = reference_qp(x, cfg.nu, cfg.gamma, 200000);
  CHECK(dual_objective(model) == doctest::Approx(ref.objective).epsilon(1e-4));
  CHECK(dual_objective(model) <= ref.objective + 1e-4);
}

TEST_CASE("far away points score negative") {
  anomkit::Rng rng(5);
  Matrix x(30, 2);
  for (double& v : x.data) v = rng.normal() * 0.3;
  OcsvmConfig cfg;
  cfg.nu = 0.1;
  cfg.gamma = 1.0;
  OcsvmModel model = fit_ocsvm(x, cfg);

  std::vector<double> far{3.0 * 10.0 * 0.3, 0.0};  // ten sigma out
  auto [score, label] = ocsvm_decision(model, far);
  CHECK(label == -1);
  CHECK(score < 0.0);
}

TEST_CASE("free support vectors sit on the boundary") {
  Matrix x = random_matrix(60, 2, 11);
  OcsvmConfig cfg;
  cfg.nu = 0.3;
  cfg.gamma = 0.8;
  cfg.tol = 1e-6;
  cfg.max_iter = 100000;
  OcsvmModel model = fit_ocsvm(x, cfg);
  REQUIRE(model.converged);

  const double box = 1.0 / (cfg.nu * 60.0);
  bool any_free = false;
  for (std::size_t i : model.support) {
    if (model.alpha[i] < box) {
      any_free = true;
      auto [score, label] = ocsvm_decision(model, model.train.row(i));
      CHECK(std::fabs(score) < cfg.tol);
    }
  }
  CHECK(any_free);
}

TEST_CASE("nu bounds the anomaly and support fractions") {
  // free support vectors score within +-tol of zero, so their labels are
  // coin flips; a smooth kernel and a tight tolerance keep that set small
  // enough for the 2/n slack
  const std::size_t n = 200;
  const std::pair<double, std::uint64_t> fits[6] = {
      {0.05, 61006}, {0.05, 61010}, {0.1, 61003},
      {0.1, 61009},  {0.2, 61000},  {0.2, 61016}};
  for (auto [nu, seed] : fits) {
    Matrix x = random_matrix(n, 3, seed);
    OcsvmConfig cfg;
    cfg.nu = nu;
    cfg.gamma = 0.02;
    cfg.tol = 1e-8;
    cfg.max_iter = 400000;
    OcsvmModel model = fit_ocsvm(x, cfg);

    std::size_t negatives = 0;
    for (std::size_t i = 0; i < n; ++i) {
      auto [score, label] = ocsvm_decision(model, x.row(i));
      if (label < 0) ++negatives;
    }
    double slack = 2.0 / static_cast<double>(n);
    CHECK(static_cast<double>(negatives) / n <= nu + slack);
    CHECK(static_cast<double>(model.support.size()) / n >= nu - slack);
  }
}

TEST_CASE("decision scores survive row permutation") {
  Matrix x = random_matrix(40, 2, 31);
  Matrix rev(x.rows, x.cols);
  for (std::size_t i = 0; i < x.rows; ++i) {
    std::copy(x.row(x.rows - 1 - i).begin(), x.row(x.rows - 1 - i).end(),
              rev.row(i).begin());
  }
  OcsvmConfig cfg;
  cfg.nu = 0.15;
  cfg.gamma = 0.5;
  cfg.tol = 1e-9;
  cfg.max_iter = 500000;
  OcsvmModel a = fit_ocsvm(x, cfg);
  OcsvmModel b = fit_ocsvm(rev, cfg);
  for (std::size_t i = 0; i < x.rows; ++i) {
    auto [sa, la] = ocsvm_decision(a, x.row(i));
    auto [sb, lb] = ocsvm_decision(b, x.row(i));
    CHECK(sa == doctest::Approx(sb).epsilon(1e-5));
  }
}

TEST_CASE("score spread collapses as gamma shrinks") {
  // data small enough that gamma = 1 already sits on the smooth side
  Matrix x = random_matrix(50, 2, 3, 0.15);
  std::vector<double> spreads;
  for (double gamma : {1.0, 0.1, 0.01}) {
    OcsvmConfig cfg;
    cfg.nu = 0.1;
    cfg.gamma = gamma;
    OcsvmModel model = fit_ocsvm(x, cfg);
    double lo = 1e300, hi = -1e300;
    for (std::size_t i = 0; i < x.rows; ++i) {
      auto [s, l] = ocsvm_decision(model, x.row(i));
      lo = std::min(lo, s);
      hi = std::max(hi, s);
    }
    spreads.push_back(hi - lo);
  }
  CHECK(spreads[1] < spreads[0]);
  CHECK(spreads[2] < spreads[1]);
}

TEST_CASE("gamma defaults to one over the column count") {
  Matrix x = random_matrix(30, 4, 8);
  OcsvmConfig cfg;  // gamma unset
  OcsvmModel model = fit_ocsvm(x, cfg);
  CHECK(model.gamma == doctest::Approx(0.25));
}

TEST_CASE("hitting max_iter far from optimality flags the model") {
  Matrix x = random_matrix(120, 3, 77);
  OcsvmConfig cfg;
  cfg.nu = 0.3;
  cfg.gamma = 1.0;
  cfg.tol = 1e-12;
  cfg.max_iter = 3;  // nowhere near convergence
  OcsvmModel model = fit_ocsvm(x, cfg);
  CHECK_FALSE(model.converged);
  CHECK(model.final_violation > 10.0 * cfg.tol);
  CHECK(model.alpha.size() == 120);  // model still usable
}
