#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "anomkit/errors.hpp"
#include "anomkit/neural.hpp"
#include "support.hpp"

using namespace anomkit;
using namespace anomkit::neural;
using testsupport::random_matrix;

namespace {

std::vector<DenseLayer> make_layers(const std::vector<std::size_t>& widths,
                                    std::uint64_t seed) {
  Rng rng(seed);
  std::vector<DenseLayer> layers;
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    DenseLayer l;
    l.w = Matrix(widths[i + 1], widths[i]);
    for (double& v : l.w.data) {
      v = rng.normal() / std::sqrt(static_cast<double>(widths[i]));
    }
    l.b.resize(widths[i + 1]);
    for (double& v : l.b) v = 0.1 * rng.normal();
    layers.push_back(std::move(l));
  }
  return layers;
}

double ae_loss(const std::vector<DenseLayer>& layers,
               std::span<const double> x) {
  std::vector<double> out = mlp_forward(layers, x);
  double s = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    double d = out[i] - x[i];
    s += d * d;
  }
  return s / static_cast<double>(out.size());
}

bool grad_close(double analytic, double numeric) {
  double diff = std::fabs(analytic - numeric);
  return diff <= 1e-4 * std::max({1.0, std::fabs(analytic), std::fabs(numeric)});
}

// central differences over every parameter coordinate
void check_ae_gradients(std::vector<DenseLayer> layers,
                        const std::vector<double>& x) {
  std::vector<DenseLayer> grads;
  for (const auto& l : layers) {
    DenseLayer g;
    g.w = Matrix(l.w.rows, l.w.cols, 0.0);
    g.b.assign(l.b.size(), 0.0);
    grads.push_back(std::move(g));
  }
  mlp_backward(layers, x, grads);

  const double eps = 1e-5;
  for (std::size_t li = 0; li < layers.size(); ++li) {
    double num_norm = 0.0, diff_norm = 0.0, an_norm = 0.0;
    auto probe = [&](double& theta, double analytic) {
      double saved = theta;
      theta = saved + eps;
      double up = ae_loss(layers, x);
      theta = saved - eps;
      double down = ae_loss(layers, x);
      theta = saved;
      double numeric = (up - down) / (2.0 * eps);
      CHECK(grad_close(analytic, numeric));
      double d = analytic - numeric;
      diff_norm += d * d;
      num_norm += numeric * numeric;
      an_norm += analytic * analytic;
    };
    for (std::size_t i = 0; i < layers[li].w.data.size(); ++i) {
      probe(layers[li].w.data[i], grads[li].w.data[i]);
    }
    for (std::size_t i = 0; i < layers[li].b.size(); ++i) {
      probe(layers[li].b[i], grads[li].b[i]);
    }
    // per-tensor norm check
    double denom = std::sqrt(an_norm) + std::sqrt(num_norm);
    if (denom > 0.0) {
      CHECK(std::sqrt(diff_norm) / denom < 1e-4);
    }
  }
}

VaeModel make_vae(std::size_t input, std::vector<std::size_t> hidden,
                  std::size_t latent, std::uint64_t seed) {
  Rng rng(seed);
  auto layer = [&](std::size_t out, std::size_t in) {
    DenseLayer l;
    l.w = Matrix(out, in);
    for (double& v : l.w.data) {
      v = rng.normal() / std::sqrt(static_cast<double>(in));
    }
    l.b.resize(out);
    for (double& v : l.b) v = 0.1 * rng.normal();
    return l;
  };
  VaeModel m;
  m.arch = {input, hidden, latent};
  std::size_t prev = input;
  for (std::size_t h : hidden) {
    m.encoder.push_back(layer(h, prev));
    prev = h;
  }
  m.mu_head = layer(latent, prev);
  m.logvar_head = layer(latent, prev);
  prev = latent;
  for (std::size_t i = hidden.size(); i-- > 0;) {
    m.decoder.push_back(layer(hidden[i], prev));
    prev = hidden[i];
  }
  m.decoder.push_back(layer(input, prev));
  return m;
}

double vae_loss_at(const VaeModel& m, const std::vector<double>& x,
                   const std::vector<double>& eps, double beta) {
  VaeCache cache;
  std::vector<double> out = vae_forward(m, x, eps, &cache);
  double recon = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    double d = out[i] - x[i];
    recon += d * d;
  }
  recon /= static_cast<double>(out.size());
  return recon + beta * kl_standard_normal(cache.mu, cache.logvar) /
                     static_cast<double>(x.size());
}

Matrix standardized(Matrix x) {
  for (std::size_t c = 0; c < x.cols; ++c) {
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t r = 0; r < x.rows; ++r) {
      sum += x(r, c);
      sum2 += x(r, c) * x(r, c);
    }
    double mean = sum / static_cast<double>(x.rows);
    double var = sum2 / static_cast<double>(x.rows) - mean * mean;
    if (var <= 0.0) continue;
    double sd = std::sqrt(var);
    for (std::size_t r = 0; r < x.rows; ++r) x(r, c) = (x(r, c) - mean) / sd;
  }
  return x;
}

// 200 points on a 2-d linear manifold embedded in 10-d, standardized
Matrix manifold_data(std::uint64_t seed) {
  Rng rng(seed);
  Matrix basis(10, 2);
  for (double& v : basis.data) v = rng.normal();
  Matrix x(200, 10);
  for (std::size_t r = 0; r < 200; ++r) {
    double z0 = rng.normal(), z1 = rng.normal();
    for (std::size_t c = 0; c < 10; ++c) {
      x(r, c) = basis(c, 0) * z0 + basis(c, 1) * z1;
    }
  }
  return standardized(x);
}

}  // namespace

TEST_CASE("mlp_forward with zero weights reconstructs zero") {
  std::vector<DenseLayer> layers = make_layers({4, 3, 2, 3, 4}, 1);
  for (auto& l : layers) {
    std::fill(l.w.data.begin(), l.w.data.end(), 0.0);
    std::fill(l.b.begin(), l.b.end(), 0.0);
  }
  std::vector<double> x{1.0, -2.0, 3.0, 0.5};
  auto out = mlp_forward(layers, x);
  for (double v : out) CHECK(v == 0.0);
}

TEST_CASE("identity layer pair reproduces the input exactly") {
  // d = p: two linear layers, both identity
  std::vector<DenseLayer> layers;
  for (int i = 0; i < 2; ++i) {
    DenseLayer l;
    l.w = Matrix(3, 3, 0.0);
    for (std::size_t j = 0; j < 3; ++j) l.w(j, j) = 1.0;
    l.b.assign(3, 0.0);
    layers.push_back(std::move(l));
  }
  std::vector<double> x{2.0, -7.0, 0.25};
  auto out = mlp_forward(layers, x);
  for (std::size_t i = 0; i < 3; ++i) CHECK(out[i] == x[i]);

  // perfect reconstruction -> zero gradient everywhere
  std::vector<DenseLayer> grads;
  for (const auto& l : layers) {
    DenseLayer g;
    g.w = Matrix(3, 3, 0.0);
    g.b.assign(3, 0.0);
    grads.push_back(std::move(g));
  }
  double loss = mlp_backward(layers, x, grads);
  CHECK(loss == 0.0);
  for (const auto& g : grads) {
    for (double v : g.w.data) CHECK(v == 0.0);
    for (double v : g.b) CHECK(v == 0.0);
  }
}

TEST_CASE("forward output stays finite for random parameters") {
  Rng rng(4);
  std::vector<DenseLayer> layers = make_layers({6, 5, 2, 5, 6}, 9);
  for (int t = 0; t < 20; ++t) {
    std::vector<double> x(6);
    for (double& v : x) v = rng.normal() * 10.0;
    for (double v : mlp_forward(layers, x)) CHECK(std::isfinite(v));
  }
}

TEST_CASE("autoencoder gradients match central differences") {
  Rng rng(123);
  for (int point = 0; point < 10; ++point) {
    std::vector<DenseLayer> layers =
        make_layers({5, 3, 2, 3, 5}, 500 + static_cast<std::uint64_t>(point));
    std::vector<double> x(5);
    for (double& v : x) v = rng.normal();
    check_ae_gradients(layers, x);
  }
}

TEST_CASE("dead relu units receive zero gradient") {
  std::vector<DenseLayer> layers = make_layers({3, 2, 1, 2, 3}, 77);
  // force hidden unit 0 of the first layer dead for this input
  layers[0].w(0, 0) = -5.0;
  layers[0].w(0, 1) = -5.0;
  layers[0].w(0, 2) = -5.0;
  layers[0].b[0] = -50.0;

  std::vector<double> x{1.0, 2.0, 3.0};
  std::vector<DenseLayer> grads;
  for (const auto& l : layers) {
    DenseLayer g;
    g.w = Matrix(l.w.rows, l.w.cols, 0.0);
    g.b.assign(l.b.size(), 0.0);
    grads.push_back(std::move(g));
  }
  mlp_backward(layers, x, grads);
  for (std::size_t c = 0; c < 3; ++c) CHECK(grads[0].w(0, c) == 0.0);
  CHECK(grads[0].b[0] == 0.0);
}

TEST_CASE("kl_standard_normal closed forms") {
  std::vector<double> zero{0.0};
  CHECK(kl_standard_normal(zero, zero) == 0.0);
  std::vector<double> mu{1.0};
  CHECK(kl_standard_normal(mu, zero) == doctest::Approx(0.5).epsilon(1e-15));

  Rng rng(6);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> m(4), lv(4);
    for (double& v : m) v = rng.normal();
    for (double& v : lv) v = rng.normal();
    CHECK(kl_standard_normal(m, lv) >= 0.0);
  }
}

TEST_CASE("reparameterize deterministic paths") {
  std::vector<double> mu{1.0, -2.0}, lv{0.0, 0.0};
  std::vector<double> zero{0.0, 0.0}, one{1.0, 1.0};
  auto z0 = reparameterize(mu, lv, zero);
  CHECK(z0 == mu);
  auto z1 = reparameterize(mu, lv, one);
  CHECK(z1[0] == doctest::Approx(2.0));
  CHECK(z1[1] == doctest::Approx(-1.0));
}

TEST_CASE("reparameterize sample mean approaches mu") {
  std::vector<double> mu{0.7}, lv{0.0};
  Rng rng(99);
  double sum = 0.0;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    std::vector<double> eps{rng.normal()};
    sum += reparameterize(mu, lv, eps)[0];
  }
  CHECK(std::fabs(sum / draws - 0.7) < 0.02);
}

TEST_CASE("vae gradients match central differences with fixed noise") {
  Rng rng(321);
  for (int point = 0; point < 10; ++point) {
    VaeModel m = make_vae(4, {3}, 2, 700 + static_cast<std::uint64_t>(point));
    std::vector<double> x(4), eps(2);
    for (double& v : x) v = rng.normal();
    for (double& v : eps) v = rng.normal();
    const double beta = 1.0;

    VaeGrads g = vae_gradients(m, x, eps, beta);
    const double fd_eps = 1e-5;

    auto probe_tensor = [&](DenseLayer& layer, const DenseLayer& grad) {
      double diff_norm = 0.0, an_norm = 0.0, num_norm = 0.0;
      auto probe = [&](double& theta, double analytic) {
        double saved = theta;
        theta = saved + fd_eps;
        double up = vae_loss_at(m, x, eps, beta);
        theta = saved - fd_eps;
        double down = vae_loss_at(m, x, eps, beta);
        theta = saved;
        double numeric = (up - down) / (2.0 * fd_eps);
        CHECK(grad_close(analytic, numeric));
        diff_norm += (analytic - numeric) * (analytic - numeric);
        an_norm += analytic * analytic;
        num_norm += numeric * numeric;
      };
      for (std::size_t i = 0; i < layer.w.data.size(); ++i) {
        probe(layer.w.data[i], grad.w.data[i]);
      }
      for (std::size_t i = 0; i < layer.b.size(); ++i) {
        probe(layer.b[i], grad.b[i]);
      }
      double denom = std::sqrt(an_norm) + std::sqrt(num_norm);
      if (denom > 0.0) CHECK(std::sqrt(diff_norm) / denom < 1e-4);
    };

    for (std::size_t i = 0; i < m.encoder.size(); ++i) {
      probe_tensor(m.encoder[i], g.encoder[i]);
    }
    probe_tensor(m.mu_head, g.mu_head);
    probe_tensor(m.logvar_head, g.logvar_head);
    for (std::size_t i = 0; i < m.decoder.size(); ++i) {
      probe_tensor(m.decoder[i], g.decoder[i]);
    }
  }
}

TEST_CASE("beta zero drops the kl term exactly") {
  VaeModel m = make_vae(4, {3}, 2, 13);
  Rng rng(14);
  std::vector<double> x(4), eps(2);
  for (double& v : x) v = rng.normal();
  for (double& v : eps) v = rng.normal();
  VaeGrads g = vae_gradients(m, x, eps, 0.0);
  CHECK(g.loss == g.recon);
  CHECK(g.kl > 0.0);  // reported but unweighted
}

TEST_CASE("autoencoder learns a linear manifold") {
  Matrix x = manifold_data(2024);
  MlpArch arch{10, {16, 8}, 2};
  TrainConfig cfg;
  cfg.learning_rate = 1e-3;
  cfg.epochs = 300;
  cfg.seed = 7;
  AeModel model = train_autoencoder(x, arch, cfg);

  auto errors = reconstruction_errors(model, x);
  double mean_err = std::accumulate(errors.begin(), errors.end(), 0.0) /
                    static_cast<double>(errors.size());
  CHECK(mean_err < 0.05);
  CHECK(model.loss_history.front() > 0.0);
  CHECK(std::isfinite(model.loss_history.front()));

  // 20-epoch moving average of the loss never rises materially
  const std::size_t window = 20;
  std::vector<double> ma;
  for (std::size_t i = 0; i + window <= model.loss_history.size(); ++i) {
    double s = std::accumulate(model.loss_history.begin() + i,
                               model.loss_history.begin() + i + window, 0.0);
    ma.push_back(s / window);
  }
  for (std::size_t i = 1; i < ma.size(); ++i) {
    CHECK(ma[i] <= ma[i - 1] * 1.02);  // tolerates optimizer noise, catches divergence
  }
}

TEST_CASE("training is bit-identical per seed") {
  Matrix x = manifold_data(11);
  MlpArch arch{10, {8, 4}, 2};
  TrainConfig cfg;
  cfg.epochs = 25;
  cfg.seed = 42;
  AeModel a = train_autoencoder(x, arch, cfg);
  AeModel b = train_autoencoder(x, arch, cfg);
  CHECK(a.loss_history == b.loss_history);
  for (std::size_t i = 0; i < a.layers.size(); ++i) {
    CHECK(a.layers[i].w.data == b.layers[i].w.data);
    CHECK(a.layers[i].b == b.layers[i].b);
  }

  VaeModel va = train_vae(x, arch, cfg);
  VaeModel vb = train_vae(x, arch, cfg);
  CHECK(va.loss_history == vb.loss_history);
  CHECK(va.mu_head.w.data == vb.mu_head.w.data);
}

TEST_CASE("vae trains on the manifold task") {
  Matrix x = manifold_data(500);
  MlpArch arch{10, {16, 8}, 2};
  TrainConfig cfg;
  cfg.learning_rate = 3e-3;
  cfg.epochs = 150;
  cfg.seed = 21;
  VaeModel model = train_vae(x, arch, cfg);

  REQUIRE(model.recon_history.size() == cfg.epochs);
  CHECK(model.recon_history.back() <= 0.5 * model.recon_history.front());
  for (double kl : model.kl_history) CHECK(std::isfinite(kl));
}

TEST_CASE("reconstruction_errors: perfect model, row order, outliers") {
  // identity model: zero errors everywhere
  AeModel identity;
  identity.arch = {3, {}, 3};
  for (int i = 0; i < 2; ++i) {
    DenseLayer l;
    l.w = Matrix(3, 3, 0.0);
    for (std::size_t j = 0; j < 3; ++j) l.w(j, j) = 1.0;
    l.b.assign(3, 0.0);
    identity.layers.push_back(std::move(l));
  }
  Matrix x = random_matrix(20, 3, 9);
  for (double e : reconstruction_errors(identity, x)) CHECK(e == 0.0);

  // row order does not matter
  Matrix trained_on = manifold_data(77);
  MlpArch arch{10, {16, 8}, 2};
  TrainConfig cfg;
  cfg.learning_rate = 3e-3;
  cfg.epochs = 200;
  cfg.seed = 3;
  AeModel model = train_autoencoder(trained_on, arch, cfg);
  auto errors = reconstruction_errors(model, trained_on);

  Matrix rev(trained_on.rows, trained_on.cols);
  for (std::size_t i = 0; i < trained_on.rows; ++i) {
    std::copy(trained_on.row(trained_on.rows - 1 - i).begin(),
              trained_on.row(trained_on.rows - 1 - i).end(), rev.row(i).begin());
  }
  auto rev_errors = reconstruction_errors(model, rev);
  for (std::size_t i = 0; i < trained_on.rows; ++i) {
    CHECK(rev_errors[i] == errors[trained_on.rows - 1 - i]);
  }

  // a 10-sigma off-manifold probe lands beyond the 95th percentile
  Matrix probe(trained_on.rows + 1, trained_on.cols);
  std::copy(trained_on.data.begin(), trained_on.data.end(), probe.data.begin());
  for (std::size_t c = 0; c < probe.cols; ++c) {
    probe(trained_on.rows, c) = (c % 2 == 0) ? 10.0 : -10.0;
  }
  auto probe_errors = reconstruction_errors(model, probe);
  std::vector<double> inliers(probe_errors.begin(), probe_errors.end() - 1);
  std::sort(inliers.begin(), inliers.end());
  double p95 = inliers[static_cast<std::size_t>(0.95 * inliers.size())];
  CHECK(probe_errors.back() > p95);
}

TEST_CASE("ensemble averaging and flagging") {
  std::vector<std::vector<double>> per_model{{0.2}, {0.4}, {0.6}};
  auto avg = average_errors(per_model);
  REQUIRE(avg.size() == 1);
  CHECK(avg[0] == doctest::Approx(0.4).epsilon(1e-15));

  // M = 1 reduces to the single model
  auto single = average_errors({{0.9, 0.1}});
  CHECK(single == std::vector<double>{0.9, 0.1});

  AnomalyResult res = ensemble_flag({0.2, 0.7, 0.5}, 0.5, "ae-ensemble");
  CHECK(res.flags == std::vector<bool>{false, true, false});  // strict >
  CHECK(res.threshold == 0.5);
}

TEST_CASE("ensemble_detect over trained models equals the composed pipeline") {
  Matrix x = manifold_data(88);
  MlpArch arch{10, {8, 4}, 2};
  TrainConfig cfg;
  cfg.epochs = 10;
  std::vector<AeModel> models;
  for (std::uint64_t i = 0; i < 2; ++i) {
    cfg.seed = mix_seed(4, i);
    models.push_back(train_autoencoder(x, arch, cfg));
  }
  AnomalyResult direct = ensemble_detect(models, x, 0.3);
  std::vector<std::vector<double>> errs{reconstruction_errors(models[0], x),
                                        reconstruction_errors(models[1], x)};
  AnomalyResult composed = ensemble_flag(average_errors(errs), 0.3, "ae-ensemble");
  CHECK(direct.scores == composed.scores);
  CHECK(direct.flags == composed.flags);

  // M = 1 is the single model
  AnomalyResult one = ensemble_detect(std::vector<AeModel>{models[0]}, x, 0.3);
  CHECK(one.scores == errs[0]);
}

TEST_CASE("ensemble averaging commutes with row permutation") {
  Rng rng(1);
  std::vector<std::vector<double>> errs(3, std::vector<double>(10));
  for (auto& e : errs) {
    for (double& v : e) v = rng.uniform();
  }
  auto avg = average_errors(errs);
  std::vector<std::vector<double>> rev = errs;
  for (auto& e : rev) std::reverse(e.begin(), e.end());
  auto avg_rev = average_errors(rev);
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK(avg_rev[i] == avg[9 - i]);
  }
}

TEST_CASE("arch validation rejects inverted widths") {
  MlpArch bad{4, {8}, 5};  // latent wider than input
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  MlpArch zero{0, {4}, 1};
  CHECK_THROWS_AS(zero.validate(), ConfigError);
  MlpArch ok{8, {4}, 2};
  CHECK_NOTHROW(ok.validate());
}

TEST_CASE("checkpoints round-trip through json") {
  Matrix x = manifold_data(31);
  MlpArch arch{10, {6, 3}, 2};
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.seed = 8;
  AeModel model = train_autoencoder(x, arch, cfg);
  AeModel restored = ae_from_checkpoint(ae_checkpoint(model));
  CHECK(restored.arch.hidden == model.arch.hidden);
  auto a = reconstruction_errors(model, x);
  auto b = reconstruction_errors(restored, x);
  CHECK(a == b);

  VaeModel vmodel = train_vae(x, arch, cfg);
  VaeModel vrestored = vae_from_checkpoint(vae_checkpoint(vmodel));
  auto va = reconstruction_errors(vmodel, x);
  auto vb = reconstruction_errors(vrestored, x);
  CHECK(va == vb);
}

TEST_CASE("diverged training raises") {
  Matrix x = manifold_data(3);
  MlpArch arch{10, {8}, 2};
  TrainConfig cfg;
  cfg.learning_rate = 1e150;  // guaranteed blow-up
  cfg.epochs = 50;
  cfg.seed = 1;
  CHECK_THROWS_AS(train_autoencoder(x, arch, cfg), DivergedLossError);
}
