#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "anomkit/deadline.hpp"
#include "anomkit/matrix.hpp"
#include "anomkit/result.hpp"
#include "anomkit/rng.hpp"

namespace anomkit::neural {

// Encoder widths input -> hidden... -> latent; the decoder mirrors them.
// Hidden layers are ReLU, the latent and output layers are linear.
struct MlpArch {
  std::size_t input = 0;
  std::vector<std::size_t> hidden;
  std::size_t latent = 0;

  void validate() const;  // input >= latent >= 1, widths >= 1
  std::size_t n_ae_layers() const { return 2 * (hidden.size() + 1); }
};

struct DenseLayer {
  Matrix w;  // out x in
  std::vector<double> b;
};

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t epochs = 100;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  double beta = 1.0;  // KL weight (VAE only)
};

struct AeModel {
  MlpArch arch;
  std::vector<DenseLayer> layers;
  TrainConfig cfg;
  std::vector<double> loss_history;  // mean per-sample loss per epoch
};

struct VaeModel {
  MlpArch arch;
  std::vector<DenseLayer> encoder;  // hidden chain, ReLU each
  DenseLayer mu_head;
  DenseLayer logvar_head;
  std::vector<DenseLayer> decoder;  // latent -> hidden... -> output
  TrainConfig cfg;
  std::vector<double> loss_history;   // recon + beta * kl / d
  std::vector<double> recon_history;  // reconstruction term alone
  std::vector<double> kl_history;     // kl term alone
};

// For a mirrored stack of L layers, ReLU follows every layer except the
// latent layer (index L/2 - 1) and the output layer (index L - 1).
inline bool ae_relu_after(std::size_t layer, std::size_t n_layers) {
  return layer != n_layers / 2 - 1 && layer != n_layers - 1;
}

struct ForwardCache {
  std::vector<std::vector<double>> inputs;  // activation entering each layer
  std::vector<std::vector<double>> pre;     // pre-activation per layer
};

std::vector<double> mlp_forward(const std::vector<DenseLayer>& layers,
                                std::span<const double> x,
                                ForwardCache* cache = nullptr);

// Accumulates the gradient of the per-sample MSE into `grads`; returns the loss.
double mlp_backward(const std::vector<DenseLayer>& layers,
                    std::span<const double> x, std::vector<DenseLayer>& grads);

double kl_standard_normal(std::span<const double> mu,
                          std::span<const double> logvar);

std::vector<double> reparameterize(std::span<const double> mu,
                                   std::span<const double> logvar,
                                   std::span<const double> eps);

struct VaeCache {
  ForwardCache trunk;
  std::vector<double> mu, logvar, z, eps;
  ForwardCache dec;
  std::vector<double> output;
};

std::vector<double> vae_forward(const VaeModel& model, std::span<const double> x,
                                std::span<const double> eps,
                                VaeCache* cache = nullptr);

struct VaeGrads {
  std::vector<DenseLayer> encoder;
  DenseLayer mu_head;
  DenseLayer logvar_head;
  std::vector<DenseLayer> decoder;
  double loss = 0.0;
  double recon = 0.0;
  double kl = 0.0;
};

VaeGrads vae_gradients(const VaeModel& model, std::span<const double> x,
                       std::span<const double> eps, double beta);

AeModel train_autoencoder(const Matrix& x, const MlpArch& arch,
                          const TrainConfig& cfg,
                          const Deadline& deadline = Deadline::none());

VaeModel train_vae(const Matrix& x, const MlpArch& arch, const TrainConfig& cfg,
                   const Deadline& deadline = Deadline::none());

// Per-row mean squared error across the d features. The VAE decodes from
// z = mu, so detection stays deterministic.
std::vector<double> reconstruction_errors(const AeModel& model, const Matrix& x,
                                          const Deadline& deadline = Deadline::none());
std::vector<double> reconstruction_errors(const VaeModel& model, const Matrix& x,
                                          const Deadline& deadline = Deadline::none());

std::vector<double> average_errors(
    const std::vector<std::vector<double>>& per_model_errors);

// flag rows whose model-averaged error exceeds t (strictly)
AnomalyResult ensemble_flag(const std::vector<double>& averaged_errors, double t,
                            const std::string& method);

AnomalyResult ensemble_detect(const std::vector<AeModel>& models,
                              const Matrix& x, double t,
                              const Deadline& deadline = Deadline::none());
AnomalyResult ensemble_detect(const std::vector<VaeModel>& models,
                              const Matrix& x, double t,
                              const Deadline& deadline = Deadline::none());

// JSON checkpoint container (format_version 1)
std::string ae_checkpoint(const AeModel& model);
AeModel ae_from_checkpoint(const std::string& text);
std::string vae_checkpoint(const VaeModel& model);
VaeModel vae_from_checkpoint(const std::string& text);

}  // namespace anomkit::neural
