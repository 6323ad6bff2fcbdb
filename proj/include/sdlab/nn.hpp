#pragma once

#include <vector>

#include "sdlab/autodiff.hpp"
#include "sdlab/rng.hpp"

namespace sdlab::nd {

// One dense layer: out = act(x . W + b), W is fan_in x fan_out.
struct Linear {
  Tensor W;
  Tensor b;
  Act act = Act::Identity;
};

Tensor xavier_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng);
Linear make_linear(std::size_t fan_in, std::size_t fan_out, Act act, Rng& rng);

struct Mlp {
  std::vector<Linear> layers;

  // tape refs to the parameters placed by the latest forward();
  // order: W0, b0, W1, b1, ...
  std::vector<ValueRef> param_refs;

  ValueRef forward(Tape& tape, ValueRef x);
  Tensor infer(const Tensor& x) const;  // tape-free forward

  std::vector<Tensor*> params();
  std::vector<const Tensor*> params() const;
  std::size_t param_count() const;
};

Mlp make_mlp(const std::vector<std::size_t>& widths, const std::vector<Act>& acts, Rng& rng);

// Adam optimizer state. Moments mirror the parameter list; updates are
// functional (new tensors), matching the rest of the library.
struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long step = 0;
  std::vector<Tensor> m;
  std::vector<Tensor> v;
};

AdamState adam_init(const std::vector<const Tensor*>& params, double lr = 1e-3);
std::vector<Tensor> adam_step(AdamState& state, const std::vector<const Tensor*>& params,
                              const std::vector<const Tensor*>& grads);

// convenience: run one adam update over an Mlp given tape gradients
void adam_update_mlp(AdamState& state, Mlp& net, const Tape& tape);

}  // namespace sdlab::nd
