#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sdlab/nn.hpp"

namespace sdlab::vae {

// Feedforward VAE: leaky-ReLU hidden layers, linear head emitting
// [mean, logvar], ReLU decoder output (experiments are non-negative).
struct VaeSpec {
  std::size_t input_dim = 0;
  std::size_t latent_dim = 0;
  std::vector<std::size_t> hidden;  // encoder widths; decoder mirrors them

  static VaeSpec projectile();        // 64 -> 64 -> 32 -> 2x2
  static VaeSpec pump_pattern();      // 864 halving plan, latent 4
};

struct VaeParams {
  VaeSpec spec;
  nd::Mlp encoder;  // emits 2 * latent_dim (mean then logvar)
  nd::Mlp decoder;
};

VaeParams make_vae(const VaeSpec& spec, std::uint64_t seed);

struct Moments {
  std::vector<double> mean;
  std::vector<double> logvar;
};

Moments encode(const VaeParams& p, const std::vector<double>& x);

std::vector<double> reparameterize(const std::vector<double>& mean,
                                   const std::vector<double>& logvar,
                                   const std::vector<double>& noise);

// loss pieces exactly as reported: mean squared error plus the analytic
// KL to a unit gaussian, summed over latent dims and averaged over a batch
struct ElboParts {
  double recon = 0.0;
  double kl = 0.0;
  double total() const { return recon + kl; }
};

ElboParts elbo_loss(const std::vector<std::vector<double>>& x,
                    const std::vector<std::vector<double>>& reconstruction,
                    const std::vector<std::vector<double>>& mean,
                    const std::vector<std::vector<double>>& logvar);

double kl_term(const std::vector<double>& mean, const std::vector<double>& logvar);

std::vector<double> generate(const VaeParams& p, const std::vector<double>& z);

struct VaeTrainOptions {
  std::size_t epochs = 2000;
  std::size_t batch = 128;
  double lr = 1e-3;
  std::size_t lr_halve_every = 0;  // 0 disables the step decay
  double kl_weight = 1.0;
  // reconstruction summed over dims (gaussian likelihood scaling); the
  // reported recon metric stays a plain per-dim MSE
  double recon_weight = -1.0;  // -1: use input_dim
  double recon_stop = -1.0;    // stop early when epoch recon MSE falls below
};

struct VaeTrainResult {
  VaeParams params;
  std::vector<double> loss_history;        // per-epoch mean training loss
  std::vector<double> recon_history;       // per-epoch mean recon MSE
  bool smooth_decreasing = true;           // 10-epoch smoothed monotonicity
  bool reached_stop = false;
};

VaeTrainResult train_vae(const VaeSpec& spec, const std::vector<std::vector<double>>& dataset,
                         std::size_t epochs, std::uint64_t seed, VaeTrainOptions options = {});

// window-smoothed monotone decrease check used for the loss history
bool smoothed_monotone_decreasing(const std::vector<double>& xs, std::size_t window);

void save_checkpoint(const VaeParams& p, const std::string& path);
VaeParams load_checkpoint(const std::string& path);

}  // namespace sdlab::vae
