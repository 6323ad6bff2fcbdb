#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sdlab/expr.hpp"
#include "sdlab/nn.hpp"

namespace sdlab::eql {

// Per-unit activation dictionary. Product units consume two pre-activation
// slots (the x_i * x_j terms); everything else consumes one.
enum class Unit { Identity, Sin, Cos, Square, Sinh, Product };

Unit unit_from_name(const std::string& name);
const char* unit_name(Unit u);

struct EqlSpec {
  std::size_t n_inputs = 0;
  std::vector<Unit> layer1;  // sin/cos/sinh allowed here only
  std::vector<Unit> layer2;
  double target_sparsity = 0.90;
  double prune_fraction = 0.02;     // per-layer fraction masked per round
  std::size_t retrain_epochs = 10;  // after each pruning round

  void validate() const;
  static std::size_t slots(const std::vector<Unit>& units);
};

// One dense layer with a frozen-zero mask over every connection. Biases
// count as connections from a constant-one unit, so they prune like any
// other weight (contribution |b|). Mask layout: W entries row-major, then
// the bias entries.
struct MaskedLinear {
  nd::Tensor W;
  nd::Tensor b;
  std::vector<std::uint8_t> mask;  // 1 = active

  std::size_t connection_count() const { return W.size() + b.size(); }
  std::size_t active_count() const;
  void apply_mask();
};

struct EqlNetwork {
  EqlSpec spec;
  MaskedLinear l1, l2, out;

  double sparsity() const;  // masked / total over all weight matrices
  std::size_t total_weights() const;

  // plain forward returning the unit activations per layer
  struct Activations {
    std::vector<std::vector<double>> h1;  // per sample
    std::vector<std::vector<double>> h2;
    std::vector<double> y;
  };
  Activations forward(const std::vector<std::vector<double>>& X) const;
  double predict(const std::vector<double>& x) const;
};

EqlNetwork make_eql(const EqlSpec& spec, std::uint64_t seed);

struct EqlTrainOptions {
  std::size_t init_epochs = 800;
  std::size_t batch = 64;
  double lr = 1e-3;
  double val_fraction = 0.2;  // 80-20 split
  double mse_guard = 3.0;     // stop when val MSE exceeds guard x baseline
  // each pruning round retrains in retrain_epochs slices until the
  // baseline error is reached again, up to this many slices
  std::size_t recovery_slices = 20;
  // failed rounds are rolled back and retried on the next-weakest
  // connections this many times before stopping
  std::size_t prune_retries = 24;
  // extra settling epochs for the surviving connections before readout
  std::size_t final_polish_epochs = 300;
  // resume from an existing (possibly pre-masked) network; when it already
  // meets the sparsity target no pruning rounds run
  const EqlNetwork* warm_start = nullptr;
};

// Stage one: a plain ReLU MLP fit establishing the baseline error.
struct BaselineResult {
  double val_mse = 0.0;
  double train_mse = 0.0;
};
BaselineResult fit_baseline(const Dataset& data, std::uint64_t seed, std::size_t epochs = 800,
                            double val_fraction = 0.2);

// Oversample high-value rows and drop low-value outliers before fitting.
Dataset balance_dataset(const Dataset& rows, double q_hi = 0.8, double q_lo = 0.05,
                        std::size_t oversample_factor = 2);

// mean |W_ij x_i| over a calibration batch for every connection of one
// layer (upstream activations given per sample; the bias connections see a
// constant-one upstream). Output is aligned with the layer mask.
std::vector<double> connection_contribution(const MaskedLinear& layer,
                                            const std::vector<std::vector<double>>& upstream);

// One pruning round: mask the ceil(k * remaining) weakest connections per
// layer, then retrain for the configured number of epochs.
struct PruneRoundResult {
  std::size_t newly_masked = 0;
  double val_mse = 0.0;
};

struct TrainState;  // opaque adam + split bookkeeping across rounds

struct PruneHistoryEntry {
  double sparsity = 0.0;
  double val_mse = 0.0;
};

struct EqlResult {
  EqlNetwork net;
  double baseline_val_mse = 0.0;
  double final_val_mse = 0.0;
  std::vector<PruneHistoryEntry> history;
  bool reached_sparsity = false;
  bool stopped_by_guard = false;  // val MSE guard tripped; best state kept
};

EqlResult train_prune_loop(const EqlSpec& spec, const Dataset& data, std::uint64_t seed,
                           const EqlTrainOptions& options = {});

// Stage three: exact symbolic readout of the pruned network.
SymbolicExpr readout_equation(const EqlNetwork& net,
                              const std::vector<std::string>& var_names = {},
                              std::size_t term_limit = 200);

}  // namespace sdlab::eql
