#include "sdlab/vae.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "sdlab/rng.hpp"

namespace sdlab::vae {

using nd::Act;
using nd::Tape;
using nd::Tensor;
using nd::ValueRef;

VaeSpec VaeSpec::projectile() { return {64, 2, {256, 128}}; }

VaeSpec VaeSpec::pump_pattern() { return {864, 4, {432, 216, 108, 54, 27}}; }

VaeParams make_vae(const VaeSpec& spec, std::uint64_t seed) {
  if (spec.input_dim == 0 || spec.latent_dim == 0)
    throw std::invalid_argument("vae: empty spec");
  Rng rng(Rng::mix(seed, 0xae1ull));
  VaeParams p;
  p.spec = spec;

  std::vector<std::size_t> enc_w{spec.input_dim};
  std::vector<Act> enc_a;
  for (std::size_t h : spec.hidden) {
    enc_w.push_back(h);
    enc_a.push_back(Act::LeakyRelu);
  }
  enc_w.push_back(2 * spec.latent_dim);
  enc_a.push_back(Act::Identity);  // linear head for mean/logvar
  p.encoder = nd::make_mlp(enc_w, enc_a, rng);

  std::vector<std::size_t> dec_w{spec.latent_dim};
  std::vector<Act> dec_a;
  for (auto it = spec.hidden.rbegin(); it != spec.hidden.rend(); ++it) {
    dec_w.push_back(*it);
    dec_a.push_back(Act::LeakyRelu);
  }
  dec_w.push_back(spec.input_dim);
  dec_a.push_back(Act::Relu);  // experiments are non-negative
  p.decoder = nd::make_mlp(dec_w, dec_a, rng);
  return p;
}

Moments encode(const VaeParams& p, const std::vector<double>& x) {
  if (x.size() != p.spec.input_dim) throw std::invalid_argument("vae encode: dimension mismatch");
  const Tensor out = p.encoder.infer(Tensor::row(x));
  Moments m;
  const std::size_t d = p.spec.latent_dim;
  m.mean.assign(out.data().begin(), out.data().begin() + d);
  m.logvar.assign(out.data().begin() + d, out.data().begin() + 2 * d);
  return m;
}

std::vector<double> reparameterize(const std::vector<double>& mean,
                                   const std::vector<double>& logvar,
                                   const std::vector<double>& noise) {
  if (mean.size() != logvar.size() || mean.size() != noise.size())
    throw std::invalid_argument("vae reparameterize: shape mismatch");
  std::vector<double> z(mean.size());
  for (std::size_t i = 0; i < z.size(); ++i)
    z[i] = mean[i] + std::exp(0.5 * logvar[i]) * noise[i];
  return z;
}

double kl_term(const std::vector<double>& mean, const std::vector<double>& logvar) {
  double kl = 0.0;
  for (std::size_t i = 0; i < mean.size(); ++i)
    kl += 1.0 + logvar[i] - mean[i] * mean[i] - std::exp(logvar[i]);
  return -0.5 * kl;
}

ElboParts elbo_loss(const std::vector<std::vector<double>>& x,
                    const std::vector<std::vector<double>>& reconstruction,
                    const std::vector<std::vector<double>>& mean,
                    const std::vector<std::vector<double>>& logvar) {
  if (x.empty() || x.size() != reconstruction.size() || x.size() != mean.size() ||
      x.size() != logvar.size())
    throw std::invalid_argument("elbo_loss: inconsistent batch");
  ElboParts parts;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double se = 0.0;
    for (std::size_t j = 0; j < x[i].size(); ++j) {
      const double d = reconstruction[i][j] - x[i][j];
      se += d * d;
    }
    parts.recon += se / static_cast<double>(x[i].size());
    parts.kl += kl_term(mean[i], logvar[i]);
  }
  parts.recon /= static_cast<double>(x.size());
  parts.kl /= static_cast<double>(x.size());
  return parts;
}

std::vector<double> generate(const VaeParams& p, const std::vector<double>& z) {
  if (z.size() != p.spec.latent_dim)
    throw std::invalid_argument("vae generate: latent dimension mismatch");
  for (double v : z)
    if (!std::isfinite(v)) throw std::invalid_argument("vae generate: non-finite latent");
  const Tensor out = p.decoder.infer(Tensor::row(z));
  return out.data();
}

bool smoothed_monotone_decreasing(const std::vector<double>& xs, std::size_t window) {
  if (xs.size() <= window) return true;
  std::vector<double> smooth;
  for (std::size_t i = 0; i + window <= xs.size(); ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < window; ++k) s += xs[i + k];
    smooth.push_back(s / window);
  }
  for (std::size_t i = 1; i < smooth.size(); ++i)
    if (smooth[i] > smooth[i - 1] + 1e-12) return false;
  return true;
}

VaeTrainResult train_vae(const VaeSpec& spec, const std::vector<std::vector<double>>& dataset,
                         std::size_t epochs, std::uint64_t seed, VaeTrainOptions options) {
  if (dataset.empty()) throw std::invalid_argument("train_vae: empty dataset");
  for (const auto& row : dataset)
    if (row.size() != spec.input_dim)
      throw std::invalid_argument("train_vae: dataset dimension mismatch");
  if (options.recon_weight < 0.0) options.recon_weight = static_cast<double>(spec.input_dim);

  VaeTrainResult result;
  result.params = make_vae(spec, seed);
  VaeParams& p = result.params;
  Rng rng(Rng::mix(seed, 0x7247ull));

  const std::size_t n = dataset.size();
  const std::size_t d = spec.latent_dim;
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  std::vector<const Tensor*> param_ptrs;
  for (const Tensor* t : static_cast<const nd::Mlp&>(p.encoder).params()) param_ptrs.push_back(t);
  for (const Tensor* t : static_cast<const nd::Mlp&>(p.decoder).params()) param_ptrs.push_back(t);
  nd::AdamState adam = nd::adam_init(param_ptrs, options.lr);

  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    if (options.lr_halve_every > 0 && epoch > 0 && epoch % options.lr_halve_every == 0)
      adam.lr *= 0.5;
    // seeded shuffle
    for (std::size_t i = n; i > 1; --i) {
      const std::size_t k = rng.uniform_int(i);
      std::swap(order[i - 1], order[k]);
    }
    double epoch_loss = 0.0, epoch_recon = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n; start += options.batch) {
      const std::size_t b = std::min(options.batch, n - start);
      Tensor xb(b, spec.input_dim);
      Tensor noise(b, d);
      for (std::size_t i = 0; i < b; ++i) {
        const auto& row = dataset[order[start + i]];
        for (std::size_t j = 0; j < spec.input_dim; ++j) xb.at(i, j) = row[j];
        for (std::size_t j = 0; j < d; ++j) noise.at(i, j) = rng.normal();
      }

      Tape tape;
      ValueRef x = tape.constant(xb);
      ValueRef head = p.encoder.forward(tape, x);
      ValueRef mean = tape.slice_cols(head, 0, d);
      ValueRef logvar = tape.slice_cols(head, d, d);
      ValueRef z = tape.add(mean, tape.mul(tape.apply(Act::Exp, tape.scale(logvar, 0.5)),
                                           tape.constant(noise)));
      ValueRef recon = p.decoder.forward(tape, z);
      ValueRef recon_mse = tape.mse(recon, x);
      // kl = -0.5 sum(1 + logvar - mean^2 - exp(logvar)) / batch
      ValueRef kl_inner = tape.add(tape.add_scalar(logvar, 1.0),
                                   tape.scale(tape.add(tape.apply(Act::Square, mean),
                                                       tape.apply(Act::Exp, logvar)),
                                              -1.0));
      ValueRef kl = tape.scale(tape.sum(kl_inner), -0.5 / static_cast<double>(b));
      ValueRef loss = tape.add(tape.scale(recon_mse, options.recon_weight),
                               tape.scale(kl, options.kl_weight));
      const double loss_val = tape.value(loss).item();
      if (!std::isfinite(loss_val))
        throw std::runtime_error("train_vae: loss diverged (non-finite) at epoch " +
                                 std::to_string(epoch));
      tape.backward(loss);

      std::vector<Tensor> grads;
      std::vector<const Tensor*> grad_ptrs;
      for (ValueRef r : p.encoder.param_refs) grads.push_back(tape.grad(r));
      for (ValueRef r : p.decoder.param_refs) grads.push_back(tape.grad(r));
      for (const Tensor& g : grads) grad_ptrs.push_back(&g);
      std::vector<const Tensor*> cur;
      for (const Tensor* t : static_cast<const nd::Mlp&>(p.encoder).params()) cur.push_back(t);
      for (const Tensor* t : static_cast<const nd::Mlp&>(p.decoder).params()) cur.push_back(t);
      std::vector<Tensor> updated = nd::adam_step(adam, cur, grad_ptrs);
      std::size_t idx = 0;
      for (Tensor* t : p.encoder.params()) *t = std::move(updated[idx++]);
      for (Tensor* t : p.decoder.params()) *t = std::move(updated[idx++]);

      epoch_loss += loss_val;
      epoch_recon += tape.value(recon_mse).item();
      ++batches;
    }
    result.loss_history.push_back(epoch_loss / batches);
    result.recon_history.push_back(epoch_recon / batches);
    if (options.recon_stop > 0.0 && result.recon_history.back() <= options.recon_stop) {
      result.reached_stop = true;
      break;
    }
  }
  result.smooth_decreasing = smoothed_monotone_decreasing(result.loss_history, 10);
  return result;
}

namespace {

nlohmann::json mlp_to_json(const nd::Mlp& net) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : net.layers) {
    layers.push_back({{"in", l.W.rows()},
                      {"out", l.W.cols()},
                      {"act", nd::act_name(l.act)},
                      {"W", l.W.data()},
                      {"b", l.b.data()}});
  }
  return layers;
}

nd::Act act_from_name(const std::string& s) {
  using nd::Act;
  if (s == "identity") return Act::Identity;
  if (s == "relu") return Act::Relu;
  if (s == "leaky_relu") return Act::LeakyRelu;
  if (s == "tanh") return Act::Tanh;
  if (s == "sin") return Act::Sin;
  if (s == "cos") return Act::Cos;
  if (s == "square") return Act::Square;
  if (s == "exp") return Act::Exp;
  if (s == "sinh") return Act::Sinh;
  throw std::invalid_argument("checkpoint: unknown activation " + s);
}

nd::Mlp mlp_from_json(const nlohmann::json& layers) {
  nd::Mlp net;
  for (const auto& jl : layers) {
    nd::Linear l;
    const std::size_t in = jl.at("in"), out = jl.at("out");
    l.W = Tensor(in, out);
    l.b = Tensor(1, out);
    const auto w = jl.at("W").get<std::vector<double>>();
    const auto b = jl.at("b").get<std::vector<double>>();
    if (w.size() != l.W.size() || b.size() != l.b.size())
      throw std::runtime_error("checkpoint: tensor size mismatch");
    l.W.data() = w;
    l.b.data() = b;
    l.act = act_from_name(jl.at("act").get<std::string>());
    net.layers.push_back(std::move(l));
  }
  return net;
}

}  // namespace

void save_checkpoint(const VaeParams& p, const std::string& path) {
  nlohmann::json j;
  j["format"] = "sdlab.vae";
  j["version"] = 1;
  j["input_dim"] = p.spec.input_dim;
  j["latent_dim"] = p.spec.latent_dim;
  j["hidden"] = p.spec.hidden;
  j["encoder"] = mlp_to_json(p.encoder);
  j["decoder"] = mlp_to_json(p.decoder);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_checkpoint: cannot open " + path);
  out << j.dump();
}

VaeParams load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path);
  nlohmann::json j;
  in >> j;
  if (j.value("format", "") != "sdlab.vae")
    throw std::runtime_error("load_checkpoint: not a vae checkpoint");
  VaeParams p;
  p.spec.input_dim = j.at("input_dim");
  p.spec.latent_dim = j.at("latent_dim");
  p.spec.hidden = j.at("hidden").get<std::vector<std::size_t>>();
  p.encoder = mlp_from_json(j.at("encoder"));
  p.decoder = mlp_from_json(j.at("decoder"));
  return p;
}

}  // namespace sdlab::vae
