#include "anomkit/neural.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "anomkit/errors.hpp"

namespace anomkit::neural {

namespace {

constexpr double kLogvarClamp = 30.0;

void affine(const DenseLayer& layer, std::span<const double> in,
            std::vector<double>& out) {
  const std::size_t rows = layer.w.rows;
  const std::size_t cols = layer.w.cols;
  out.resize(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    double s = layer.b[r];
    const double* wr = layer.w.data.data() + r * cols;
    for (std::size_t c = 0; c < cols; ++c) s += wr[c] * in[c];
    out[r] = s;
  }
}

// grads.w += delta (x) in, grads.b += delta
void accumulate_layer(DenseLayer& grads, std::span<const double> delta,
                      std::span<const double> in) {
  const std::size_t rows = grads.w.rows;
  const std::size_t cols = grads.w.cols;
  for (std::size_t r = 0; r < rows; ++r) {
    double* gr = grads.w.data.data() + r * cols;
    for (std::size_t c = 0; c < cols; ++c) gr[c] += delta[r] * in[c];
    grads.b[r] += delta[r];
  }
}

// delta_in = W^T delta
void backprop_delta(const DenseLayer& layer, std::span<const double> delta,
                    std::vector<double>& out) {
  const std::size_t rows = layer.w.rows;
  const std::size_t cols = layer.w.cols;
  out.assign(cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* wr = layer.w.data.data() + r * cols;
    for (std::size_t c = 0; c < cols; ++c) out[c] += wr[c] * delta[r];
  }
}

DenseLayer zero_like(const DenseLayer& layer) {
  DenseLayer g;
  g.w = Matrix(layer.w.rows, layer.w.cols, 0.0);
  g.b.assign(layer.b.size(), 0.0);
  return g;
}

DenseLayer init_layer(std::size_t out, std::size_t in, bool relu, Rng& rng) {
  DenseLayer layer;
  layer.w = Matrix(out, in);
  layer.b.assign(out, 0.0);
  const double scale =
      std::sqrt((relu ? 2.0 : 1.0) / static_cast<double>(in));
  for (double& v : layer.w.data) v = rng.normal() * scale;
  return layer;
}

double mse(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return s / static_cast<double>(a.size());
}

}  // namespace

void MlpArch::validate() const {
  if (input < 1 || latent < 1) throw ConfigError("layer widths must be >= 1");
  if (latent > input) {
    throw ConfigError("latent width " + std::to_string(latent) +
                      " exceeds input width " + std::to_string(input));
  }
  for (std::size_t h : hidden) {
    if (h < 1) throw ConfigError("layer widths must be >= 1");
  }
}

std::vector<double> mlp_forward(const std::vector<DenseLayer>& layers,
                                std::span<const double> x, ForwardCache* cache) {
  const std::size_t n_layers = layers.size();
  std::vector<double> current(x.begin(), x.end());
  if (cache) {
    cache->inputs.assign(n_layers, {});
    cache->pre.assign(n_layers, {});
  }
  std::vector<double> pre;
  for (std::size_t i = 0; i < n_layers; ++i) {
    if (cache) cache->inputs[i] = current;
    affine(layers[i], current, pre);
    if (cache) cache->pre[i] = pre;
    if (ae_relu_after(i, n_layers)) {
      for (double& v : pre) v = v > 0.0 ? v : 0.0;
    }
    current = pre;
  }
  return current;
}

double mlp_backward(const std::vector<DenseLayer>& layers,
                    std::span<const double> x, std::vector<DenseLayer>& grads) {
  const std::size_t n_layers = layers.size();
  const double d = static_cast<double>(x.size());
  ForwardCache cache;
  std::vector<double> out = mlp_forward(layers, x, &cache);

  double loss = mse(out, x);
  std::vector<double> delta(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    delta[i] = 2.0 * (out[i] - x[i]) / d;
  }

  std::vector<double> next;
  for (std::size_t i = n_layers; i-- > 0;) {
    accumulate_layer(grads[i], delta, cache.inputs[i]);
    if (i == 0) break;
    backprop_delta(layers[i], delta, next);
    if (ae_relu_after(i - 1, n_layers)) {
      for (std::size_t c = 0; c < next.size(); ++c) {
        if (cache.pre[i - 1][c] <= 0.0) next[c] = 0.0;
      }
    }
    delta = next;
  }
  return loss;
}

double kl_standard_normal(std::span<const double> mu,
                          std::span<const double> logvar) {
  double s = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    s += mu[i] * mu[i] + std::exp(logvar[i]) - 1.0 - logvar[i];
  }
  return 0.5 * s;
}

std::vector<double> reparameterize(std::span<const double> mu,
                                   std::span<const double> logvar,
                                   std::span<const double> eps) {
  std::vector<double> z(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) {
    z[i] = mu[i] + std::exp(0.5 * logvar[i]) * eps[i];
  }
  return z;
}

namespace {

// decoder activation plan: ReLU on every layer except the final output
bool dec_relu_after(std::size_t layer, std::size_t n_layers) {
  return layer + 1 != n_layers;
}

std::vector<double> run_chain(const std::vector<DenseLayer>& layers,
                              std::span<const double> x, bool relu_all,
                              ForwardCache* cache,
                              bool relu_except_last = false) {
  std::vector<double> current(x.begin(), x.end());
  if (cache) {
    cache->inputs.assign(layers.size(), {});
    cache->pre.assign(layers.size(), {});
  }
  std::vector<double> pre;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (cache) cache->inputs[i] = current;
    affine(layers[i], current, pre);
    if (cache) cache->pre[i] = pre;
    bool relu = relu_all || (relu_except_last && dec_relu_after(i, layers.size()));
    if (relu) {
      for (double& v : pre) v = v > 0.0 ? v : 0.0;
    }
    current = pre;
  }
  return current;
}

}  // namespace

std::vector<double> vae_forward(const VaeModel& model, std::span<const double> x,
                                std::span<const double> eps, VaeCache* cache) {
  VaeCache local;
  VaeCache& c = cache ? *cache : local;

  std::vector<double> h = run_chain(model.encoder, x, true, &c.trunk);
  affine(model.mu_head, h, c.mu);
  affine(model.logvar_head, h, c.logvar);
  for (double& v : c.logvar) v = std::clamp(v, -kLogvarClamp, kLogvarClamp);
  c.eps.assign(eps.begin(), eps.end());
  c.z = reparameterize(c.mu, c.logvar, eps);
  c.output = run_chain(model.decoder, c.z, false, &c.dec, true);
  return c.output;
}

VaeGrads vae_gradients(const VaeModel& model, std::span<const double> x,
                       std::span<const double> eps, double beta) {
  const double d = static_cast<double>(x.size());
  VaeCache cache;
  std::vector<double> out = vae_forward(model, x, eps, &cache);

  VaeGrads g;
  for (const auto& l : model.encoder) g.encoder.push_back(zero_like(l));
  g.mu_head = zero_like(model.mu_head);
  g.logvar_head = zero_like(model.logvar_head);
  for (const auto& l : model.decoder) g.decoder.push_back(zero_like(l));

  g.recon = mse(out, x);
  g.kl = kl_standard_normal(cache.mu, cache.logvar);
  g.loss = g.recon + beta * g.kl / d;

  // decoder backward
  std::vector<double> delta(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    delta[i] = 2.0 * (out[i] - x[i]) / d;
  }
  std::vector<double> next;
  for (std::size_t i = model.decoder.size(); i-- > 0;) {
    accumulate_layer(g.decoder[i], delta, cache.dec.inputs[i]);
    backprop_delta(model.decoder[i], delta, next);
    if (i > 0 && dec_relu_after(i - 1, model.decoder.size())) {
      for (std::size_t c2 = 0; c2 < next.size(); ++c2) {
        if (cache.dec.pre[i - 1][c2] <= 0.0) next[c2] = 0.0;
      }
    }
    delta = next;
  }
  // delta now holds dL/dz
  const std::size_t p = cache.mu.size();
  std::vector<double> dmu(p), dlogvar(p);
  for (std::size_t j = 0; j < p; ++j) {
    dmu[j] = delta[j] + beta / d * cache.mu[j];
    double dz_dlv = cache.eps[j] * 0.5 * std::exp(0.5 * cache.logvar[j]);
    double kl_term = beta / d * 0.5 * (std::exp(cache.logvar[j]) - 1.0);
    bool clamped = std::fabs(cache.logvar[j]) >= kLogvarClamp;
    dlogvar[j] = clamped ? 0.0 : delta[j] * dz_dlv + kl_term;
  }

  // activation entering the heads
  std::vector<double> h_store;
  if (model.encoder.empty()) {
    h_store.assign(x.begin(), x.end());
  } else {
    h_store = cache.trunk.pre.back();
    for (double& v : h_store) v = v > 0.0 ? v : 0.0;
  }
  accumulate_layer(g.mu_head, dmu, h_store);
  accumulate_layer(g.logvar_head, dlogvar, h_store);

  std::vector<double> dh_mu, dh_lv;
  backprop_delta(model.mu_head, dmu, dh_mu);
  backprop_delta(model.logvar_head, dlogvar, dh_lv);
  std::vector<double> dh(dh_mu.size());
  for (std::size_t j = 0; j < dh.size(); ++j) dh[j] = dh_mu[j] + dh_lv[j];

  // encoder backward (all ReLU)
  delta = dh;
  for (std::size_t i = model.encoder.size(); i-- > 0;) {
    for (std::size_t c2 = 0; c2 < delta.size(); ++c2) {
      if (cache.trunk.pre[i][c2] <= 0.0) delta[c2] = 0.0;
    }
    accumulate_layer(g.encoder[i], delta, cache.trunk.inputs[i]);
    if (i == 0) break;
    backprop_delta(model.encoder[i], delta, next);
    delta = next;
  }
  return g;
}

namespace {

struct AdamState {
  std::vector<DenseLayer> m, v;
  std::size_t t = 0;
};

AdamState adam_init(const std::vector<const DenseLayer*>& params) {
  AdamState st;
  for (const DenseLayer* p : params) {
    st.m.push_back(zero_like(*p));
    st.v.push_back(zero_like(*p));
  }
  return st;
}

void adam_step(std::vector<DenseLayer*>& params,
               const std::vector<const DenseLayer*>& grads, AdamState& st,
               double lr) {
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  st.t += 1;
  const double corr1 = 1.0 - std::pow(b1, static_cast<double>(st.t));
  const double corr2 = 1.0 - std::pow(b2, static_cast<double>(st.t));
  for (std::size_t p = 0; p < params.size(); ++p) {
    auto update = [&](double& theta, double g, double& m, double& v) {
      m = b1 * m + (1.0 - b1) * g;
      v = b2 * v + (1.0 - b2) * g * g;
      theta -= lr * (m / corr1) / (std::sqrt(v / corr2) + eps);
    };
    auto& w = params[p]->w.data;
    const auto& gw = grads[p]->w.data;
    for (std::size_t i = 0; i < w.size(); ++i) {
      update(w[i], gw[i], st.m[p].w.data[i], st.v[p].w.data[i]);
    }
    auto& b = params[p]->b;
    const auto& gb = grads[p]->b;
    for (std::size_t i = 0; i < b.size(); ++i) {
      update(b[i], gb[i], st.m[p].b[i], st.v[p].b[i]);
    }
  }
}

void scale_grads(std::vector<DenseLayer>& grads, double factor) {
  for (auto& g : grads) {
    for (double& v : g.w.data) v *= factor;
    for (double& v : g.b) v *= factor;
  }
}

void zero_grads(std::vector<DenseLayer>& grads) {
  for (auto& g : grads) {
    std::fill(g.w.data.begin(), g.w.data.end(), 0.0);
    std::fill(g.b.begin(), g.b.end(), 0.0);
  }
}

std::vector<std::size_t> epoch_order(std::size_t n, Rng& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  return order;
}

void check_finite(double loss) {
  if (!std::isfinite(loss)) {
    throw DivergedLossError("training loss became non-finite");
  }
}

}  // namespace

AeModel train_autoencoder(const Matrix& x, const MlpArch& arch,
                          const TrainConfig& cfg, const Deadline& deadline) {
  arch.validate();
  if (x.cols != arch.input) {
    throw ConfigError("dataset width does not match arch input width");
  }
  if (cfg.epochs < 1 || cfg.learning_rate <= 0.0) {
    throw ConfigError("epochs must be >= 1 and learning rate positive");
  }

  Rng rng(cfg.seed);
  AeModel model;
  model.arch = arch;
  model.cfg = cfg;

  std::vector<std::size_t> widths;
  widths.push_back(arch.input);
  for (std::size_t h : arch.hidden) widths.push_back(h);
  widths.push_back(arch.latent);
  for (std::size_t i = arch.hidden.size(); i-- > 0;) widths.push_back(arch.hidden[i]);
  widths.push_back(arch.input);

  const std::size_t n_layers = widths.size() - 1;
  for (std::size_t i = 0; i < n_layers; ++i) {
    model.layers.push_back(init_layer(widths[i + 1], widths[i],
                                      ae_relu_after(i, n_layers), rng));
  }

  std::vector<DenseLayer> grads;
  for (const auto& l : model.layers) grads.push_back(zero_like(l));

  std::vector<DenseLayer*> params;
  std::vector<const DenseLayer*> param_view, grad_view;
  for (auto& l : model.layers) params.push_back(&l);
  for (auto& l : model.layers) param_view.push_back(&l);
  for (auto& g : grads) grad_view.push_back(&g);
  AdamState adam = adam_init(param_view);

  const std::size_t n = x.rows;
  const std::size_t batch = std::max<std::size_t>(1, cfg.batch_size);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    deadline.check();
    auto order = epoch_order(n, rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t stop = std::min(start + batch, n);
      zero_grads(grads);
      for (std::size_t s = start; s < stop; ++s) {
        epoch_loss += mlp_backward(model.layers, x.row(order[s]), grads);
      }
      scale_grads(grads, 1.0 / static_cast<double>(stop - start));
      adam_step(params, grad_view, adam, cfg.learning_rate);
    }
    epoch_loss /= static_cast<double>(n);
    check_finite(epoch_loss);
    model.loss_history.push_back(epoch_loss);
  }
  return model;
}

VaeModel train_vae(const Matrix& x, const MlpArch& arch, const TrainConfig& cfg,
                   const Deadline& deadline) {
  arch.validate();
  if (x.cols != arch.input) {
    throw ConfigError("dataset width does not match arch input width");
  }
  if (cfg.epochs < 1 || cfg.learning_rate <= 0.0) {
    throw ConfigError("epochs must be >= 1 and learning rate positive");
  }

  Rng rng(cfg.seed);
  VaeModel model;
  model.arch = arch;
  model.cfg = cfg;

  std::size_t prev = arch.input;
  for (std::size_t h : arch.hidden) {
    model.encoder.push_back(init_layer(h, prev, true, rng));
    prev = h;
  }
  model.mu_head = init_layer(arch.latent, prev, false, rng);
  model.logvar_head = init_layer(arch.latent, prev, false, rng);

  prev = arch.latent;
  std::vector<std::size_t> dec_widths;
  for (std::size_t i = arch.hidden.size(); i-- > 0;) dec_widths.push_back(arch.hidden[i]);
  dec_widths.push_back(arch.input);
  for (std::size_t i = 0; i < dec_widths.size(); ++i) {
    bool relu = i + 1 != dec_widths.size();
    model.decoder.push_back(init_layer(dec_widths[i], prev, relu, rng));
    prev = dec_widths[i];
  }

  auto collect_params = [&](VaeModel& m) {
    std::vector<DenseLayer*> out;
    for (auto& l : m.encoder) out.push_back(&l);
    out.push_back(&m.mu_head);
    out.push_back(&m.logvar_head);
    for (auto& l : m.decoder) out.push_back(&l);
    return out;
  };
  auto collect_grads = [&](VaeGrads& g) {
    std::vector<const DenseLayer*> out;
    for (auto& l : g.encoder) out.push_back(&l);
    out.push_back(&g.mu_head);
    out.push_back(&g.logvar_head);
    for (auto& l : g.decoder) out.push_back(&l);
    return out;
  };

  std::vector<DenseLayer*> params = collect_params(model);
  std::vector<const DenseLayer*> param_view(params.begin(), params.end());
  AdamState adam = adam_init(param_view);

  const std::size_t n = x.rows;
  const std::size_t batch = std::max<std::size_t>(1, cfg.batch_size);
  std::vector<double> eps(arch.latent);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    deadline.check();
    auto order = epoch_order(n, rng);
    double epoch_loss = 0.0;
    double epoch_recon = 0.0;
    double epoch_kl = 0.0;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t stop = std::min(start + batch, n);
      VaeGrads batch_grads;
      bool first = true;
      for (std::size_t s = start; s < stop; ++s) {
        for (double& e : eps) e = rng.normal();
        VaeGrads g = vae_gradients(model, x.row(order[s]), eps, cfg.beta);
        epoch_loss += g.loss;
        epoch_recon += g.recon;
        epoch_kl += g.kl;
        if (first) {
          batch_grads = std::move(g);
          first = false;
        } else {
          auto add = [](DenseLayer& into, const DenseLayer& from) {
            for (std::size_t i = 0; i < into.w.data.size(); ++i) {
              into.w.data[i] += from.w.data[i];
            }
            for (std::size_t i = 0; i < into.b.size(); ++i) into.b[i] += from.b[i];
          };
          for (std::size_t i = 0; i < batch_grads.encoder.size(); ++i) {
            add(batch_grads.encoder[i], g.encoder[i]);
          }
          add(batch_grads.mu_head, g.mu_head);
          add(batch_grads.logvar_head, g.logvar_head);
          for (std::size_t i = 0; i < batch_grads.decoder.size(); ++i) {
            add(batch_grads.decoder[i], g.decoder[i]);
          }
        }
      }
      const double inv = 1.0 / static_cast<double>(stop - start);
      scale_grads(batch_grads.encoder, inv);
      scale_grads(batch_grads.decoder, inv);
      for (double& v : batch_grads.mu_head.w.data) v *= inv;
      for (double& v : batch_grads.mu_head.b) v *= inv;
      for (double& v : batch_grads.logvar_head.w.data) v *= inv;
      for (double& v : batch_grads.logvar_head.b) v *= inv;

      std::vector<const DenseLayer*> grad_view = collect_grads(batch_grads);
      adam_step(params, grad_view, adam, cfg.learning_rate);
    }
    epoch_loss /= static_cast<double>(n);
    check_finite(epoch_loss);
    model.loss_history.push_back(epoch_loss);
    model.recon_history.push_back(epoch_recon / static_cast<double>(n));
    model.kl_history.push_back(epoch_kl / static_cast<double>(n));
  }
  return model;
}

std::vector<double> reconstruction_errors(const AeModel& model, const Matrix& x,
                                          const Deadline& deadline) {
  std::vector<double> errors(x.rows);
  for (std::size_t i = 0; i < x.rows; ++i) {
    if ((i & 0xFF) == 0) deadline.check();
    std::vector<double> out = mlp_forward(model.layers, x.row(i));
    errors[i] = mse(out, x.row(i));
  }
  return errors;
}

std::vector<double> reconstruction_errors(const VaeModel& model, const Matrix& x,
                                          const Deadline& deadline) {
  std::vector<double> errors(x.rows);
  std::vector<double> zero_eps(model.arch.latent, 0.0);
  for (std::size_t i = 0; i < x.rows; ++i) {
    if ((i & 0xFF) == 0) deadline.check();
    std::vector<double> out = vae_forward(model, x.row(i), zero_eps);
    errors[i] = mse(out, x.row(i));
  }
  return errors;
}

std::vector<double> average_errors(
    const std::vector<std::vector<double>>& per_model_errors) {
  if (per_model_errors.empty()) throw ConfigError("empty ensemble");
  std::vector<double> avg(per_model_errors[0].size(), 0.0);
  for (const auto& errs : per_model_errors) {
    for (std::size_t i = 0; i < avg.size(); ++i) avg[i] += errs[i];
  }
  for (double& v : avg) v /= static_cast<double>(per_model_errors.size());
  return avg;
}

AnomalyResult ensemble_flag(const std::vector<double>& averaged_errors, double t,
                            const std::string& method) {
  AnomalyResult res;
  res.method = method;
  res.threshold = t;
  res.scores = averaged_errors;
  res.flags.resize(averaged_errors.size());
  for (std::size_t i = 0; i < averaged_errors.size(); ++i) {
    res.flags[i] = averaged_errors[i] > t;
  }
  return res;
}

AnomalyResult ensemble_detect(const std::vector<AeModel>& models,
                              const Matrix& x, double t,
                              const Deadline& deadline) {
  std::vector<std::vector<double>> errors;
  for (const auto& m : models) {
    errors.push_back(reconstruction_errors(m, x, deadline));
  }
  return ensemble_flag(average_errors(errors), t, "ae-ensemble");
}

AnomalyResult ensemble_detect(const std::vector<VaeModel>& models,
                              const Matrix& x, double t,
                              const Deadline& deadline) {
  std::vector<std::vector<double>> errors;
  for (const auto& m : models) {
    errors.push_back(reconstruction_errors(m, x, deadline));
  }
  return ensemble_flag(average_errors(errors), t, "vae-ensemble");
}

namespace {

nlohmann::json layer_to_json(const DenseLayer& l) {
  return {{"rows", l.w.rows},
          {"cols", l.w.cols},
          {"w", l.w.data},
          {"b", l.b}};
}

DenseLayer layer_from_json(const nlohmann::json& j) {
  DenseLayer l;
  l.w.rows = j.at("rows").get<std::size_t>();
  l.w.cols = j.at("cols").get<std::size_t>();
  l.w.data = j.at("w").get<std::vector<double>>();
  l.b = j.at("b").get<std::vector<double>>();
  if (l.w.data.size() != l.w.rows * l.w.cols || l.b.size() != l.w.rows) {
    throw ConfigError("checkpoint layer has inconsistent shapes");
  }
  return l;
}

nlohmann::json arch_to_json(const MlpArch& a) {
  return {{"input", a.input}, {"hidden", a.hidden}, {"latent", a.latent}};
}

MlpArch arch_from_json(const nlohmann::json& j) {
  MlpArch a;
  a.input = j.at("input").get<std::size_t>();
  a.hidden = j.at("hidden").get<std::vector<std::size_t>>();
  a.latent = j.at("latent").get<std::size_t>();
  return a;
}

nlohmann::json config_to_json(const TrainConfig& c) {
  return {{"learning_rate", c.learning_rate},
          {"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"seed", c.seed},
          {"beta", c.beta}};
}

TrainConfig config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.learning_rate = j.at("learning_rate").get<double>();
  c.epochs = j.at("epochs").get<std::size_t>();
  c.batch_size = j.at("batch_size").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.beta = j.at("beta").get<double>();
  return c;
}

}  // namespace

std::string ae_checkpoint(const AeModel& model) {
  nlohmann::json j;
  j["format_version"] = 1;
  j["kind"] = "ae";
  j["arch"] = arch_to_json(model.arch);
  j["config"] = config_to_json(model.cfg);
  j["final_loss"] =
      model.loss_history.empty() ? 0.0 : model.loss_history.back();
  for (const auto& l : model.layers) j["layers"].push_back(layer_to_json(l));
  return j.dump(2);
}

AeModel ae_from_checkpoint(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  if (j.at("kind").get<std::string>() != "ae") {
    throw ConfigError("checkpoint is not an autoencoder");
  }
  AeModel model;
  model.arch = arch_from_json(j.at("arch"));
  model.cfg = config_from_json(j.at("config"));
  for (const auto& l : j.at("layers")) model.layers.push_back(layer_from_json(l));
  if (j.contains("final_loss")) {
    model.loss_history.push_back(j["final_loss"].get<double>());
  }
  return model;
}

std::string vae_checkpoint(const VaeModel& model) {
  nlohmann::json j;
  j["format_version"] = 1;
  j["kind"] = "vae";
  j["arch"] = arch_to_json(model.arch);
  j["config"] = config_to_json(model.cfg);
  j["final_loss"] =
      model.loss_history.empty() ? 0.0 : model.loss_history.back();
  for (const auto& l : model.encoder) j["encoder"].push_back(layer_to_json(l));
  j["mu_head"] = layer_to_json(model.mu_head);
  j["logvar_head"] = layer_to_json(model.logvar_head);
  for (const auto& l : model.decoder) j["decoder"].push_back(layer_to_json(l));
  return j.dump(2);
}

VaeModel vae_from_checkpoint(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  if (j.at("kind").get<std::string>() != "vae") {
    throw ConfigError("checkpoint is not a variational autoencoder");
  }
  VaeModel model;
  model.arch = arch_from_json(j.at("arch"));
  model.cfg = config_from_json(j.at("config"));
  if (j.contains("encoder")) {
    for (const auto& l : j.at("encoder")) {
      model.encoder.push_back(layer_from_json(l));
    }
  }
  model.mu_head = layer_from_json(j.at("mu_head"));
  model.logvar_head = layer_from_json(j.at("logvar_head"));
  for (const auto& l : j.at("decoder")) model.decoder.push_back(layer_from_json(l));
  if (j.contains("final_loss")) {
    model.loss_history.push_back(j["final_loss"].get<double>());
  }
  return model;
}

}  // namespace anomkit::neural
