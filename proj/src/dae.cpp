#include "sdlab/dae.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "sdlab/projectile.hpp"
#include "sdlab/rng.hpp"

namespace sdlab::dae {

using nd::Act;
using nd::Tape;
using nd::Tensor;
using nd::ValueRef;

Attribute attribute_from_name(const std::string& name) {
  if (name == "slope") return Attribute::Slope;
  if (name == "curvature") return Attribute::Curvature;
  if (name == "amplitude") return Attribute::Amplitude;
  if (name == "max_frequency" || name == "frequency") return Attribute::MaxFrequency;
  if (name == "initial_velocity" || name == "velocity") return Attribute::InitialVelocity;
  throw std::invalid_argument("unknown attribute: " + name);
}

const char* attribute_name(Attribute a) {
  switch (a) {
    case Attribute::Slope: return "slope";
    case Attribute::Curvature: return "curvature";
    case Attribute::Amplitude: return "amplitude";
    case Attribute::MaxFrequency: return "max_frequency";
    case Attribute::InitialVelocity: return "initial_velocity";
  }
  return "?";
}

double extract_attribute(const std::vector<double>& x, Attribute name) {
  const std::size_t n = x.size();
  switch (name) {
    case Attribute::Slope: {
      if (n < 2) throw std::invalid_argument("slope: need >= 2 samples");
      double s = 0.0;
      for (std::size_t i = 0; i + 1 < n; ++i) s += x[i + 1] - x[i];
      return s / static_cast<double>(n - 1);
    }
    case Attribute::Curvature: {
      if (n < 3) throw std::invalid_argument("curvature: need >= 3 samples");
      double s = 0.0;
      for (std::size_t i = 1; i + 1 < n; ++i) s += x[i + 1] - 2.0 * x[i] + x[i - 1];
      return s / static_cast<double>(n - 2);
    }
    case Attribute::Amplitude:
      return std::accumulate(x.begin(), x.end(), 0.0);
    case Attribute::MaxFrequency: {
      // highest-magnitude nonzero DFT bin above the noise floor
      const double noise_floor = 1e-6;
      double best_mag = noise_floor;
      std::size_t best_bin = 0;
      for (std::size_t k = 1; k <= n / 2; ++k) {
        double re = 0.0, im = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double ph = -6.283185307179586 * static_cast<double>(k * i) / n;
          re += x[i] * std::cos(ph);
          im += x[i] * std::sin(ph);
        }
        const double mag = std::sqrt(re * re + im * im);
        if (mag > best_mag) {
          best_mag = mag;
          best_bin = k;
        }
      }
      return static_cast<double>(best_bin);
    }
    case Attribute::InitialVelocity:
      return ex::launch_speed(x);
  }
  throw std::invalid_argument("extract_attribute: unknown attribute");
}

double spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw std::invalid_argument("spearman: need two equal-length series, n >= 2");
  auto ranks = [](const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(n);
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i;
      while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
      const double avg = 0.5 * static_cast<double>(i + j) + 1.0;  // average rank, 1-based
      for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  const auto rx = ranks(xs);
  const auto ry = ranks(ys);
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0)
    throw std::domain_error("spearman: zero rank variance, correlation undefined");
  return sxy / std::sqrt(sxx * syy);
}

std::vector<double> savitzky_golay(const std::vector<double>& x, int window, int order) {
  if (window % 2 == 0 || window < 3) throw std::invalid_argument("savitzky_golay: odd window >= 3");
  if (order >= window) throw std::invalid_argument("savitzky_golay: order must be < window");
  const int n = static_cast<int>(x.size());
  if (n < window) return x;
  const int half = window / 2;
  const int m = order + 1;

  // least-squares fit of an order-p polynomial over the window, evaluated
  // at a given in-window offset; solved per offset by normal equations
  auto weights_for_offset = [&](int eval_off) {
    // design matrix A(w, j) = (w - half)^j
    std::vector<double> ata(m * m, 0.0);
    for (int w = 0; w < window; ++w) {
      double pj = 1.0;
      std::vector<double> row(m);
      for (int j = 0; j < m; ++j) {
        row[j] = pj;
        pj *= (w - half);
      }
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) ata[a * m + b] += row[a] * row[b];
    }
    // invert by gauss-jordan (tiny system)
    std::vector<double> inv(m * m, 0.0);
    for (int i = 0; i < m; ++i) inv[i * m + i] = 1.0;
    for (int col = 0; col < m; ++col) {
      int piv = col;
      for (int r = col + 1; r < m; ++r)
        if (std::abs(ata[r * m + col]) > std::abs(ata[piv * m + col])) piv = r;
      for (int c = 0; c < m; ++c) {
        std::swap(ata[piv * m + c], ata[col * m + c]);
        std::swap(inv[piv * m + c], inv[col * m + c]);
      }
      const double d = ata[col * m + col];
      for (int c = 0; c < m; ++c) {
        ata[col * m + c] /= d;
        inv[col * m + c] /= d;
      }
      for (int r = 0; r < m; ++r) {
        if (r == col) continue;
        const double f = ata[r * m + col];
        for (int c = 0; c < m; ++c) {
          ata[r * m + c] -= f * ata[col * m + c];
          inv[r * m + c] -= f * inv[col * m + c];
        }
      }
    }
    // filter weights: e_off^T (A^T A)^-1 A^T
    std::vector<double> wts(window, 0.0);
    for (int w = 0; w < window; ++w) {
      double pj = 1.0;
      std::vector<double> arow(m);
      for (int j = 0; j < m; ++j) {
        arow[j] = pj;
        pj *= (w - half);
      }
      double s = 0.0;
      double po = 1.0;
      for (int j = 0; j < m; ++j) {
        double dot = 0.0;
        for (int k = 0; k < m; ++k) dot += inv[j * m + k] * arow[k];
        s += po * dot;
        po *= (eval_off - half);
      }
      wts[w] = s;
    }
    return wts;
  };

  const auto center = weights_for_offset(half);
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) {
    int start = i - half;
    int off = half;
    if (start < 0) {
      off = i;
      start = 0;
    } else if (start + window > n) {
      off = i - (n - window);
      start = n - window;
    }
    const auto& wts = (off == half) ? center : weights_for_offset(off);
    double s = 0.0;
    for (int w = 0; w < window; ++w) s += wts[w] * x[start + w];
    out[i] = s;
  }
  return out;
}

namespace {
double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }
}  // namespace

double dist_loss(const std::vector<std::vector<double>>& z_batch,
                 const std::vector<std::vector<double>>& attr_batch,
                 const std::vector<RegularizedPair>& pairs) {
  const std::size_t n = z_batch.size();
  if (n < 2 || attr_batch.size() != n)
    throw std::invalid_argument("dist_loss: need a batch of >= 2 with matching attributes");
  double total = 0.0;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const std::size_t dim = pairs[p].latent_index;
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        const double dz = std::tanh(z_batch[i][dim] - z_batch[j][dim]);
        const double da = sgn(attr_batch[i][p] - attr_batch[j][p]);
        s += (dz - da) * (dz - da);
      }
    total += s / static_cast<double>(n * (n - 1));
  }
  return total;
}

DaeParams make_dae(const DaeSpec& spec, std::uint64_t seed) {
  if (spec.input_dim == 0 || spec.latent_dim == 0)
    throw std::invalid_argument("dae: empty spec");
  for (const auto& p : spec.pairs) {
    if (p.latent_index >= spec.latent_dim)
      throw std::invalid_argument("dae: regularized latent index out of range");
    for (const auto& q : spec.pairs)
      if (&p != &q && p.latent_index == q.latent_index)
        throw std::invalid_argument("dae: latent index regularized twice");
  }
  Rng rng(Rng::mix(seed, 0xdae1ull));
  DaeParams p;
  p.spec = spec;
  std::vector<std::size_t> enc_w{spec.input_dim};
  std::vector<Act> enc_a;
  for (std::size_t h : spec.hidden) {
    enc_w.push_back(h);
    enc_a.push_back(Act::LeakyRelu);
  }
  enc_w.push_back(spec.latent_dim);
  enc_a.push_back(Act::Identity);
  p.encoder = nd::make_mlp(enc_w, enc_a, rng);

  std::vector<std::size_t> dec_w{spec.latent_dim};
  std::vector<Act> dec_a;
  for (auto it = spec.hidden.rbegin(); it != spec.hidden.rend(); ++it) {
    dec_w.push_back(*it);
    dec_a.push_back(Act::LeakyRelu);
  }
  dec_w.push_back(spec.input_dim);
  dec_a.push_back(Act::Relu);
  p.decoder = nd::make_mlp(dec_w, dec_a, rng);
  return p;
}

std::vector<double> dae_encode(const DaeParams& p, const std::vector<double>& x) {
  if (x.size() != p.spec.input_dim) throw std::invalid_argument("dae encode: dimension mismatch");
  return p.encoder.infer(Tensor::row(x)).data();
}

std::vector<double> dae_decode(const DaeParams& p, const std::vector<double>& z) {
  if (z.size() != p.spec.latent_dim) throw std::invalid_argument("dae decode: dimension mismatch");
  return p.decoder.infer(Tensor::row(z)).data();
}

DaeTrainResult train_dae(const DaeSpec& spec, const std::vector<std::vector<double>>& experiments,
                         const std::vector<double>& y, std::size_t epochs, std::uint64_t seed,
                         DaeTrainOptions options) {
  // attribute values are fixed targets, computed once
  std::vector<std::vector<double>> attrs(experiments.size(),
                                         std::vector<double>(spec.pairs.size()));
  for (std::size_t i = 0; i < experiments.size(); ++i)
    for (std::size_t p = 0; p < spec.pairs.size(); ++p)
      attrs[i][p] = extract_attribute(experiments[i], spec.pairs[p].attribute);
  return train_dae_with_attributes(spec, experiments, attrs, y, epochs, seed, options);
}

DaeTrainResult train_dae_with_attributes(const DaeSpec& spec,
                                         const std::vector<std::vector<double>>& experiments,
                                         const std::vector<std::vector<double>>& attrs,
                                         const std::vector<double>& y, std::size_t epochs,
                                         std::uint64_t seed, DaeTrainOptions options) {
  const std::size_t n = experiments.size();
  if (n < 100) throw std::invalid_argument("train_dae: need >= 100 experiments");
  if (y.size() != n || attrs.size() != n)
    throw std::invalid_argument("train_dae: y/attribute size mismatch");
  for (const auto& a : attrs)
    if (a.size() != spec.pairs.size())
      throw std::invalid_argument("train_dae: attribute column mismatch");
  if (options.recon_weight < 0.0) options.recon_weight = static_cast<double>(spec.input_dim);

  DaeTrainResult result;
  result.params = make_dae(spec, seed);
  DaeParams& p = result.params;
  Rng rng(Rng::mix(seed, 0xdae2ull));

  std::vector<const Tensor*> param_ptrs;
  for (const Tensor* t : static_cast<const nd::Mlp&>(p.encoder).params()) param_ptrs.push_back(t);
  for (const Tensor* t : static_cast<const nd::Mlp&>(p.decoder).params()) param_ptrs.push_back(t);
  nd::AdamState adam = nd::adam_init(param_ptrs, options.lr);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    for (std::size_t i = n; i > 1; --i) {
      const std::size_t k = rng.uniform_int(i);
      std::swap(order[i - 1], order[k]);
    }
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start + 1 < n; start += options.batch) {
      const std::size_t b = std::min(options.batch, n - start);
      if (b < 2) break;
      Tensor xb(b, spec.input_dim);
      for (std::size_t i = 0; i < b; ++i)
        for (std::size_t j = 0; j < spec.input_dim; ++j)
          xb.at(i, j) = experiments[order[start + i]][j];

      Tape tape;
      ValueRef x = tape.constant(xb);
      ValueRef z = p.encoder.forward(tape, x);
      ValueRef recon = p.decoder.forward(tape, z);
      ValueRef loss = tape.scale(tape.mse(recon, x), options.recon_weight);

      if (!spec.pairs.empty() && spec.dist_weight != 0.0) {
        ValueRef ones_row = tape.constant(Tensor(1, b, 1.0));
        ValueRef ones_col = tape.constant(Tensor(b, 1, 1.0));
        for (std::size_t pi = 0; pi < spec.pairs.size(); ++pi) {
          const std::size_t dim = spec.pairs[pi].latent_index;
          ValueRef zc = tape.slice_cols(z, dim, 1);
          // D_z(i, j) = z_i - z_j via rank-one expansions
          ValueRef left = tape.matmul(zc, ones_row);
          ValueRef right = tape.matmul(ones_col, tape.reshape(zc, 1, b));
          ValueRef dz = tape.apply(Act::Tanh, tape.sub(left, right));
          Tensor target(b, b);
          for (std::size_t i = 0; i < b; ++i)
            for (std::size_t j = 0; j < b; ++j)
              target.at(i, j) =
                  sgn(attrs[order[start + i]][pi] - attrs[order[start + j]][pi]);
          ValueRef diff = tape.sub(dz, tape.constant(target));
          ValueRef pair_loss = tape.scale(tape.sum(tape.mul(diff, diff)),
                                          1.0 / static_cast<double>(b * (b - 1)));
          loss = tape.add(loss, tape.scale(pair_loss, spec.dist_weight));
        }
      }

      const double loss_val = tape.value(loss).item();
      if (!std::isfinite(loss_val))
        throw std::runtime_error("train_dae: loss diverged at epoch " + std::to_string(epoch));
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
      ++batches;
    }
    result.loss_history.push_back(epoch_loss / std::max<std::size_t>(1, batches));
  }

  // distilled dataset and training-set correlations
  result.distilled.reserve(n);
  std::vector<std::vector<double>> zs(n);
  for (std::size_t i = 0; i < n; ++i) {
    zs[i] = dae_encode(p, experiments[i]);
    DistilledRow row;
    row.z = zs[i];
    row.attributes = attrs[i];
    row.y = y[i];
    result.distilled.push_back(std::move(row));
  }
  for (std::size_t pi = 0; pi < spec.pairs.size(); ++pi) {
    std::vector<double> zdim(n), avals(n);
    for (std::size_t i = 0; i < n; ++i) {
      zdim[i] = zs[i][spec.pairs[pi].latent_index];
      avals[i] = attrs[i][pi];
    }
    const double rho = spearman(zdim, avals);
    result.spearman_per_pair.push_back(rho);
    if (rho < 0.8) result.correlation_ok = false;
  }
  return result;
}

namespace {

nlohmann::json mlp_to_json(const nd::Mlp& net) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : net.layers)
    layers.push_back({{"in", l.W.rows()},
                      {"out", l.W.cols()},
                      {"act", nd::act_name(l.act)},
                      {"W", l.W.data()},
                      {"b", l.b.data()}});
  return layers;
}

nd::Act act_from_name(const std::string& s) {
  for (nd::Act a : {Act::Identity, Act::Relu, Act::LeakyRelu, Act::Tanh, Act::Sin, Act::Cos,
                    Act::Square, Act::Exp, Act::Sinh})
    if (s == nd::act_name(a)) return a;
  throw std::invalid_argument("checkpoint: unknown activation " + s);
}

nd::Mlp mlp_from_json(const nlohmann::json& layers) {
  nd::Mlp net;
  for (const auto& jl : layers) {
    nd::Linear l;
    l.W = Tensor(jl.at("in").get<std::size_t>(), jl.at("out").get<std::size_t>());
    l.b = Tensor(1, jl.at("out").get<std::size_t>());
    l.W.data() = jl.at("W").get<std::vector<double>>();
    l.b.data() = jl.at("b").get<std::vector<double>>();
    l.act = act_from_name(jl.at("act").get<std::string>());
    net.layers.push_back(std::move(l));
  }
  return net;
}

}  // namespace

void save_checkpoint(const DaeParams& p, const std::string& path) {
  nlohmann::json j;
  j["format"] = "sdlab.dae";
  j["version"] = 1;
  j["input_dim"] = p.spec.input_dim;
  j["latent_dim"] = p.spec.latent_dim;
  j["hidden"] = p.spec.hidden;
  j["dist_weight"] = p.spec.dist_weight;
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& pr : p.spec.pairs)
    pairs.push_back({{"latent", pr.latent_index}, {"attribute", attribute_name(pr.attribute)}});
  j["pairs"] = pairs;
  j["encoder"] = mlp_to_json(p.encoder);
  j["decoder"] = mlp_to_json(p.decoder);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_checkpoint: cannot open " + path);
  out << j.dump();
}

DaeParams load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path);
  nlohmann::json j;
  in >> j;
  if (j.value("format", "") != "sdlab.dae")
    throw std::runtime_error("load_checkpoint: not a dae checkpoint");
  DaeParams p;
  p.spec.input_dim = j.at("input_dim");
  p.spec.latent_dim = j.at("latent_dim");
  p.spec.hidden = j.at("hidden").get<std::vector<std::size_t>>();
  p.spec.dist_weight = j.at("dist_weight");
  for (const auto& pr : j.at("pairs"))
    p.spec.pairs.push_back(
        {pr.at("latent").get<std::size_t>(), attribute_from_name(pr.at("attribute"))});
  p.encoder = mlp_from_json(j.at("encoder"));
  p.decoder = mlp_from_json(j.at("decoder"));
  return p;
}

}  // namespace sdlab::dae
