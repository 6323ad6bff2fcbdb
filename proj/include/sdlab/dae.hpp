#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sdlab/nn.hpp"

namespace sdlab::dae {

// Physics-informed attribute extractors. All are pure functions of the
// experiment vector.
enum class Attribute { Slope, Curvature, Amplitude, MaxFrequency, InitialVelocity };

Attribute attribute_from_name(const std::string& name);
const char* attribute_name(Attribute a);

double extract_attribute(const std::vector<double>& x, Attribute name);

// Spearman rank correlation with average ranks for ties; throws when a
// side has zero rank variance.
double spearman(const std::vector<double>& xs, const std::vector<double>& ys);

// Savitzky-Golay polynomial smoothing (least-squares window fit; edges use
// the same window evaluated off-center).
std::vector<double> savitzky_golay(const std::vector<double>& x, int window = 11, int order = 3);

struct RegularizedPair {
  std::size_t latent_index = 0;
  Attribute attribute = Attribute::Slope;
};

struct DaeSpec {
  std::size_t input_dim = 0;
  std::size_t latent_dim = 0;
  std::vector<std::size_t> hidden;  // encoder widths, decoder mirrored
  std::vector<RegularizedPair> pairs;
  double dist_weight = 1.0;  // gamma on the ordering regularizer
};

// mean over ordered pairs (i != j) of (tanh(z_i - z_j) - sgn(a_i - a_j))^2,
// summed over the regularized latent dimensions
double dist_loss(const std::vector<std::vector<double>>& z_batch,
                 const std::vector<std::vector<double>>& attr_batch,
                 const std::vector<RegularizedPair>& pairs);

struct DaeParams {
  DaeSpec spec;
  nd::Mlp encoder;
  nd::Mlp decoder;
};

DaeParams make_dae(const DaeSpec& spec, std::uint64_t seed);

std::vector<double> dae_encode(const DaeParams& p, const std::vector<double>& x);
std::vector<double> dae_decode(const DaeParams& p, const std::vector<double>& z);

struct DistilledRow {
  std::vector<double> z;
  std::vector<double> attributes;  // one per regularized pair, in pair order
  double y = 0.0;
};

struct DaeTrainOptions {
  std::size_t epochs = 1500;
  std::size_t batch = 64;
  double lr = 1e-3;
  double recon_weight = -1.0;  // -1: use input_dim
};

struct DaeTrainResult {
  DaeParams params;
  std::vector<DistilledRow> distilled;      // one row per experiment
  std::vector<double> loss_history;
  std::vector<double> spearman_per_pair;    // on the training data
  bool correlation_ok = true;               // every pair >= 0.8
};

// Trains the directional autoencoder on experiments (with target values y
// carried through to the distilled dataset) and reports the per-pair
// Spearman correlations. Attribute values are extracted from the
// experiment vectors unless supplied explicitly (e.g. measured in
// physical units while the network sees normalized inputs; the ordering
// regularizer only consumes deltas' signs, so any monotone rescaling of an
// attribute is equivalent).
DaeTrainResult train_dae(const DaeSpec& spec, const std::vector<std::vector<double>>& experiments,
                         const std::vector<double>& y, std::size_t epochs, std::uint64_t seed,
                         DaeTrainOptions options = {});

DaeTrainResult train_dae_with_attributes(const DaeSpec& spec,
                                         const std::vector<std::vector<double>>& experiments,
                                         const std::vector<std::vector<double>>& attributes,
                                         const std::vector<double>& y, std::size_t epochs,
                                         std::uint64_t seed, DaeTrainOptions options = {});

void save_checkpoint(const DaeParams& p, const std::string& path);
DaeParams load_checkpoint(const std::string& path);

}  // namespace sdlab::dae
