#include "sdlab/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace sdlab::nd {

Tensor xavier_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor W(fan_in, fan_out);
  for (std::size_t i = 0; i < W.size(); ++i) W[i] = rng.uniform(-limit, limit);
  return W;
}

Linear make_linear(std::size_t fan_in, std::size_t fan_out, Act act, Rng& rng) {
  Linear l;
  l.W = xavier_uniform(fan_in, fan_out, rng);
  l.b = Tensor(1, fan_out);
  l.act = act;
  return l;
}

Mlp make_mlp(const std::vector<std::size_t>& widths, const std::vector<Act>& acts, Rng& rng) {
  if (widths.size() < 2 || acts.size() != widths.size() - 1)
    throw std::invalid_argument("make_mlp: widths/acts mismatch");
  Mlp net;
  for (std::size_t i = 0; i + 1 < widths.size(); ++i)
    net.layers.push_back(make_linear(widths[i], widths[i + 1], acts[i], rng));
  return net;
}

ValueRef Mlp::forward(Tape& tape, ValueRef x) {
  param_refs.clear();
  ValueRef h = x;
  for (const Linear& l : layers) {
    ValueRef w = tape.leaf(l.W, true);
    ValueRef b = tape.leaf(l.b, true);
    param_refs.push_back(w);
    param_refs.push_back(b);
    h = tape.add(tape.matmul(h, w), b);
    if (l.act != Act::Identity) h = tape.apply(l.act, h);
  }
  return h;
}

Tensor Mlp::infer(const Tensor& x) const {
  Tensor h = x;
  for (const Linear& l : layers) {
    Tensor z = matmul_plain(h, l.W);
    for (std::size_t r = 0; r < z.rows(); ++r)
      for (std::size_t c = 0; c < z.cols(); ++c) {
        double v = z.at(r, c) + l.b.at(0, c);
        z.at(r, c) = act_eval(l.act, v);
      }
    h = std::move(z);
  }
  return h;
}

std::vector<Tensor*> Mlp::params() {
  std::vector<Tensor*> ps;
  for (Linear& l : layers) {
    ps.push_back(&l.W);
    ps.push_back(&l.b);
  }
  return ps;
}

std::vector<const Tensor*> Mlp::params() const {
  std::vector<const Tensor*> ps;
  for (const Linear& l : layers) {
    ps.push_back(&l.W);
    ps.push_back(&l.b);
  }
  return ps;
}

std::size_t Mlp::param_count() const {
  std::size_t n = 0;
  for (const Linear& l : layers) n += l.W.size() + l.b.size();
  return n;
}

AdamState adam_init(const std::vector<const Tensor*>& params, double lr) {
  AdamState s;
  s.lr = lr;
  for (const Tensor* p : params) {
    s.m.emplace_back(p->rows(), p->cols());
    s.v.emplace_back(p->rows(), p->cols());
  }
  return s;
}

std::vector<Tensor> adam_step(AdamState& state, const std::vector<const Tensor*>& params,
                              const std::vector<const Tensor*>& grads) {
  if (params.size() != state.m.size() || grads.size() != params.size())
    throw std::invalid_argument("adam_step: parameter/gradient count mismatch");
  state.step += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  std::vector<Tensor> out;
  out.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Tensor& p = *params[i];
    const Tensor& g = *grads[i];
    if (!p.same_shape(g) || !p.same_shape(state.m[i]))
      throw std::invalid_argument("adam_step: shape mismatch");
    if (!g.all_finite()) throw std::runtime_error("adam_step: non-finite gradient");
    Tensor np = p;
    for (std::size_t j = 0; j < p.size(); ++j) {
      double& m = state.m[i][j];
      double& v = state.v[i][j];
      m = state.beta1 * m + (1.0 - state.beta1) * g[j];
      v = state.beta2 * v + (1.0 - state.beta2) * g[j] * g[j];
      const double mh = m / bc1;
      const double vh = v / bc2;
      np[j] -= state.lr * mh / (std::sqrt(vh) + state.eps);
    }
    out.push_back(std::move(np));
  }
  return out;
}

void adam_update_mlp(AdamState& state, Mlp& net, const Tape& tape) {
  std::vector<const Tensor*> ps;
  std::vector<const Tensor*> gs;
  std::vector<Tensor> grad_store;
  grad_store.reserve(net.param_refs.size());
  for (ValueRef r : net.param_refs) grad_store.push_back(tape.grad(r));
  for (const Tensor* p : static_cast<const Mlp&>(net).params()) ps.push_back(p);
  for (const Tensor& g : grad_store) gs.push_back(&g);
  std::vector<Tensor> updated = adam_step(state, ps, gs);
  std::vector<Tensor*> dst = net.params();
  for (std::size_t i = 0; i < dst.size(); ++i) *dst[i] = std::move(updated[i]);
}

}  // namespace sdlab::nd
