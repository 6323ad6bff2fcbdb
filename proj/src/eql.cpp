#include "sdlab/eql.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "sdlab/rng.hpp"

namespace sdlab::eql {

using nd::Act;
using nd::Tape;
using nd::Tensor;
using nd::ValueRef;

Unit unit_from_name(const std::string& name) {
  if (name == "id" || name == "identity") return Unit::Identity;
  if (name == "sin") return Unit::Sin;
  if (name == "cos") return Unit::Cos;
  if (name == "sq" || name == "square") return Unit::Square;
  if (name == "sinh") return Unit::Sinh;
  if (name == "prod" || name == "product") return Unit::Product;
  throw std::invalid_argument("unknown eql unit: " + name);
}

const char* unit_name(Unit u) {
  switch (u) {
    case Unit::Identity: return "id";
    case Unit::Sin: return "sin";
    case Unit::Cos: return "cos";
    case Unit::Square: return "sq";
    case Unit::Sinh: return "sinh";
    case Unit::Product: return "prod";
  }
  return "?";
}

std::size_t EqlSpec::slots(const std::vector<Unit>& units) {
  std::size_t s = 0;
  for (Unit u : units) s += u == Unit::Product ? 2 : 1;
  return s;
}

void EqlSpec::validate() const {
  if (n_inputs == 0) throw std::invalid_argument("eql: n_inputs must be > 0");
  if (layer1.empty() || layer2.empty()) throw std::invalid_argument("eql: empty layer");
  if (target_sparsity <= 0.0 || target_sparsity >= 1.0)
    throw std::invalid_argument("eql: target sparsity must be in (0, 1)");
  if (prune_fraction <= 0.0 || prune_fraction >= 1.0)
    throw std::invalid_argument("eql: prune fraction must be in (0, 1)");
  for (Unit u : layer2)
    if (u == Unit::Sin || u == Unit::Cos || u == Unit::Sinh)
      throw std::invalid_argument("eql: periodic/hyperbolic units belong to layer 1 only");
}

std::size_t MaskedLinear::active_count() const {
  std::size_t n = 0;
  for (auto m : mask) n += m;
  return n;
}

void MaskedLinear::apply_mask() {
  for (std::size_t i = 0; i < W.size(); ++i)
    if (!mask[i]) W[i] = 0.0;
  for (std::size_t j = 0; j < b.size(); ++j)
    if (!mask[W.size() + j]) b[j] = 0.0;
}

double EqlNetwork::sparsity() const {
  const std::size_t total = total_weights();
  const std::size_t active = l1.active_count() + l2.active_count() + out.active_count();
  return static_cast<double>(total - active) / static_cast<double>(total);
}

std::size_t EqlNetwork::total_weights() const {
  return l1.connection_count() + l2.connection_count() + out.connection_count();
}

namespace {

MaskedLinear make_masked(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  MaskedLinear l;
  l.W = nd::xavier_uniform(fan_in, fan_out, rng);
  l.b = Tensor(1, fan_out);
  l.mask.assign(l.W.size() + l.b.size(), 1);
  return l;
}

Act unit_act(Unit u) {
  switch (u) {
    case Unit::Identity: return Act::Identity;
    case Unit::Sin: return Act::Sin;
    case Unit::Cos: return Act::Cos;
    case Unit::Square: return Act::Square;
    case Unit::Sinh: return Act::Sinh;
    case Unit::Product: break;
  }
  throw std::logic_error("unit_act: product units have no scalar activation");
}

// apply the units to a row of pre-activations
void apply_units(const std::vector<Unit>& units, const double* pre, double* out) {
  std::size_t slot = 0, u = 0;
  for (Unit unit : units) {
    if (unit == Unit::Product) {
      out[u++] = pre[slot] * pre[slot + 1];
      slot += 2;
    } else {
      out[u++] = nd::act_eval(unit_act(unit), pre[slot]);
      slot += 1;
    }
  }
}

}  // namespace

EqlNetwork make_eql(const EqlSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng rng(Rng::mix(seed, 0xe91ull));
  EqlNetwork net;
  net.spec = spec;
  net.l1 = make_masked(spec.n_inputs, EqlSpec::slots(spec.layer1), rng);
  net.l2 = make_masked(spec.layer1.size(), EqlSpec::slots(spec.layer2), rng);
  net.out = make_masked(spec.layer2.size(), 1, rng);
  return net;
}

EqlNetwork::Activations EqlNetwork::forward(const std::vector<std::vector<double>>& X) const {
  Activations acts;
  const std::size_t pre1 = EqlSpec::slots(spec.layer1);
  const std::size_t pre2 = EqlSpec::slots(spec.layer2);
  std::vector<double> p1(pre1), p2(pre2);
  acts.h1.reserve(X.size());
  acts.h2.reserve(X.size());
  acts.y.reserve(X.size());
  for (const auto& x : X) {
    if (x.size() != spec.n_inputs) throw std::invalid_argument("eql forward: dimension mismatch");
    for (std::size_t j = 0; j < pre1; ++j) {
      double s = l1.b.at(0, j);
      for (std::size_t i = 0; i < spec.n_inputs; ++i) s += x[i] * l1.W.at(i, j);
      p1[j] = s;
    }
    std::vector<double> h1(spec.layer1.size());
    apply_units(spec.layer1, p1.data(), h1.data());
    for (std::size_t j = 0; j < pre2; ++j) {
      double s = l2.b.at(0, j);
      for (std::size_t i = 0; i < h1.size(); ++i) s += h1[i] * l2.W.at(i, j);
      p2[j] = s;
    }
    std::vector<double> h2(spec.layer2.size());
    apply_units(spec.layer2, p2.data(), h2.data());
    double y = out.b.at(0, 0);
    for (std::size_t i = 0; i < h2.size(); ++i) y += h2[i] * out.W.at(i, 0);
    acts.h1.push_back(std::move(h1));
    acts.h2.push_back(std::move(h2));
    acts.y.push_back(y);
  }
  return acts;
}

double EqlNetwork::predict(const std::vector<double>& x) const {
  return forward({x}).y[0];
}

BaselineResult fit_baseline(const Dataset& data, std::uint64_t seed, std::size_t epochs,
                            double val_fraction) {
  if (data.size() < 50) throw std::invalid_argument("fit_baseline: need >= 50 rows");
  const std::size_t n = data.size();
  const std::size_t d = data.X[0].size();

  Rng split_rng(Rng::mix(seed, 0xba5eull));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t k = split_rng.uniform_int(i);
    std::swap(order[i - 1], order[k]);
  }
  const std::size_t n_val = std::max<std::size_t>(1, static_cast<std::size_t>(n * val_fraction));
  const std::size_t n_train = n - n_val;

  auto run = [&](std::uint64_t restart) {
    Rng rng(Rng::mix(seed, 0xba5full + restart));
    nd::Mlp net = nd::make_mlp({d, 16, 16, 1}, {Act::Relu, Act::Relu, Act::Identity}, rng);
    nd::AdamState adam = nd::adam_init(static_cast<const nd::Mlp&>(net).params(), 1e-3);
    std::vector<std::size_t> batch_order(order.begin(), order.begin() + n_train);
    const std::size_t batch = 64;
    for (std::size_t e = 0; e < epochs; ++e) {
      for (std::size_t i = batch_order.size(); i > 1; --i) {
        const std::size_t k = rng.uniform_int(i);
        std::swap(batch_order[i - 1], batch_order[k]);
      }
      for (std::size_t start = 0; start < batch_order.size(); start += batch) {
        const std::size_t b = std::min(batch, batch_order.size() - start);
        Tensor xt(b, d), yt(b, 1);
        for (std::size_t i = 0; i < b; ++i) {
          for (std::size_t j = 0; j < d; ++j) xt.at(i, j) = data.X[batch_order[start + i]][j];
          yt.at(i, 0) = data.y[batch_order[start + i]];
        }
        Tape tape;
        ValueRef pred = net.forward(tape, tape.constant(xt));
        ValueRef loss = tape.mse(pred, tape.constant(yt));
        if (!std::isfinite(tape.value(loss).item()))
          throw std::runtime_error("fit_baseline: diverged");
        tape.backward(loss);
        nd::adam_update_mlp(adam, net, tape);
      }
    }
    BaselineResult res;
    double ss = 0.0;
    for (std::size_t i = 0; i < n_train; ++i) {
      const Tensor p = net.infer(Tensor::row(data.X[order[i]]));
      const double dl = p[0] - data.y[order[i]];
      ss += dl * dl;
    }
    res.train_mse = ss / n_train;
    ss = 0.0;
    for (std::size_t i = n_train; i < n; ++i) {
      const Tensor p = net.infer(Tensor::row(data.X[order[i]]));
      const double dl = p[0] - data.y[order[i]];
      ss += dl * dl;
    }
    res.val_mse = ss / n_val;
    return res;
  };

  // two restarts guard against a dead-unit init distorting the reference
  const BaselineResult a = run(0);
  const BaselineResult b = run(1);
  return a.val_mse <= b.val_mse ? a : b;
}

Dataset balance_dataset(const Dataset& rows, double q_hi, double q_lo,
                        std::size_t oversample_factor) {
  if (rows.size() < 20) throw std::invalid_argument("balance_dataset: need >= 20 rows");
  std::vector<double> sorted = rows.y;
  std::sort(sorted.begin(), sorted.end());
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
  };
  const double hi_cut = quantile(q_hi);
  const double lo_cut = quantile(q_lo);
  Dataset out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double y = rows.y[i];
    if (y < lo_cut) continue;  // outlier low-value rows are dropped
    const std::size_t copies = y > hi_cut ? oversample_factor : 1;
    for (std::size_t c = 0; c < copies; ++c) {
      out.X.push_back(rows.X[i]);
      out.y.push_back(y);
    }
  }
  if (out.size() == 0) throw std::runtime_error("balance_dataset: every row was filtered out");
  return out;
}

std::vector<double> connection_contribution(const MaskedLinear& layer,
                                            const std::vector<std::vector<double>>& upstream) {
  if (upstream.empty()) throw std::invalid_argument("connection_contribution: empty batch");
  const std::size_t fan_in = layer.W.rows();
  const std::size_t fan_out = layer.W.cols();
  // mean |x_i| over the batch, then scaled by |W_ij|
  std::vector<double> mean_abs(fan_in, 0.0);
  for (const auto& row : upstream)
    for (std::size_t i = 0; i < fan_in; ++i) mean_abs[i] += std::abs(row[i]);
  for (auto& v : mean_abs) v /= static_cast<double>(upstream.size());
  std::vector<double> scores(layer.connection_count());
  for (std::size_t i = 0; i < fan_in; ++i)
    for (std::size_t j = 0; j < fan_out; ++j)
      scores[i * fan_out + j] = std::abs(layer.W.at(i, j)) * mean_abs[i];
  for (std::size_t j = 0; j < fan_out; ++j)
    scores[layer.W.size() + j] = std::abs(layer.b.at(0, j));  // constant-one upstream
  return scores;
}

namespace {

struct Split {
  std::vector<std::size_t> train, val;
};

Split make_split(std::size_t n, double val_fraction, Rng& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t k = rng.uniform_int(i);
    std::swap(order[i - 1], order[k]);
  }
  Split s;
  const std::size_t n_val = std::max<std::size_t>(1, static_cast<std::size_t>(n * val_fraction));
  s.train.assign(order.begin(), order.end() - static_cast<long>(n_val));
  s.val.assign(order.end() - static_cast<long>(n_val), order.end());
  return s;
}

// tape forward through the masked network; weights enter as leaves so the
// caller can read their gradients
struct TapeRefs {
  ValueRef w1, b1, w2, b2, wo, bo;
};

ValueRef eql_tape_forward(Tape& tape, const EqlNetwork& net, ValueRef x, TapeRefs& refs) {
  refs.w1 = tape.leaf(net.l1.W, true);
  refs.b1 = tape.leaf(net.l1.b, true);
  refs.w2 = tape.leaf(net.l2.W, true);
  refs.b2 = tape.leaf(net.l2.b, true);
  refs.wo = tape.leaf(net.out.W, true);
  refs.bo = tape.leaf(net.out.b, true);

  auto layer = [&tape](const std::vector<Unit>& units, ValueRef pre) {
    std::vector<ValueRef> parts;
    std::size_t slot = 0;
    for (Unit u : units) {
      if (u == Unit::Product) {
        parts.push_back(
            tape.mul(tape.slice_cols(pre, slot, 1), tape.slice_cols(pre, slot + 1, 1)));
        slot += 2;
      } else if (u == Unit::Identity) {
        parts.push_back(tape.slice_cols(pre, slot, 1));
        slot += 1;
      } else {
        parts.push_back(tape.apply(unit_act(u), tape.slice_cols(pre, slot, 1)));
        slot += 1;
      }
    }
    return tape.concat_cols(parts);
  };

  ValueRef pre1 = tape.add(tape.matmul(x, refs.w1), refs.b1);
  ValueRef h1 = layer(net.spec.layer1, pre1);
  ValueRef pre2 = tape.add(tape.matmul(h1, refs.w2), refs.b2);
  ValueRef h2 = layer(net.spec.layer2, pre2);
  return tape.add(tape.matmul(h2, refs.wo), refs.bo);
}

double eval_mse(const EqlNetwork& net, const Dataset& data, const std::vector<std::size_t>& idx) {
  if (idx.empty()) return 0.0;
  double ss = 0.0;
  for (std::size_t i : idx) {
    const double d = net.predict(data.X[i]) - data.y[i];
    ss += d * d;
  }
  return ss / static_cast<double>(idx.size());
}

// one adam epoch over the training split, gradients masked so frozen
// weights stay exactly zero
void train_epochs(EqlNetwork& net, const Dataset& data, const std::vector<std::size_t>& train_idx,
                  std::size_t epochs, std::size_t batch, nd::AdamState& adam, Rng& rng) {
  const std::size_t d = net.spec.n_inputs;
  std::vector<std::size_t> order = train_idx;
  for (std::size_t e = 0; e < epochs; ++e) {
    for (std::size_t i = order.size(); i > 1; --i) {
      const std::size_t k = rng.uniform_int(i);
      std::swap(order[i - 1], order[k]);
    }
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t b = std::min(batch, order.size() - start);
      Tensor xb(b, d), yb(b, 1);
      for (std::size_t i = 0; i < b; ++i) {
        for (std::size_t j = 0; j < d; ++j) xb.at(i, j) = data.X[order[start + i]][j];
        yb.at(i, 0) = data.y[order[start + i]];
      }
      Tape tape;
      TapeRefs refs;
      ValueRef pred = eql_tape_forward(tape, net, tape.constant(xb), refs);
      ValueRef loss = tape.mse(pred, tape.constant(yb));
      if (!std::isfinite(tape.value(loss).item()))
        throw std::runtime_error("eql training diverged");
      tape.backward(loss);

      Tensor g1 = tape.grad(refs.w1), gb1 = tape.grad(refs.b1);
      Tensor g2 = tape.grad(refs.w2), gb2 = tape.grad(refs.b2);
      Tensor go = tape.grad(refs.wo), gbo = tape.grad(refs.bo);
      auto mask_grads = [](const MaskedLinear& l, Tensor& gw, Tensor& gb) {
        for (std::size_t i = 0; i < gw.size(); ++i)
          if (!l.mask[i]) gw[i] = 0.0;
        for (std::size_t j = 0; j < gb.size(); ++j)
          if (!l.mask[gw.size() + j]) gb[j] = 0.0;
      };
      mask_grads(net.l1, g1, gb1);
      mask_grads(net.l2, g2, gb2);
      mask_grads(net.out, go, gbo);

      std::vector<const Tensor*> ps{&net.l1.W, &net.l1.b, &net.l2.W,
                                    &net.l2.b, &net.out.W, &net.out.b};
      std::vector<const Tensor*> gs{&g1, &gb1, &g2, &gb2, &go, &gbo};
      std::vector<Tensor> updated = nd::adam_step(adam, ps, gs);
      net.l1.W = std::move(updated[0]);
      net.l1.b = std::move(updated[1]);
      net.l2.W = std::move(updated[2]);
      net.l2.b = std::move(updated[3]);
      net.out.W = std::move(updated[4]);
      net.out.b = std::move(updated[5]);
      net.l1.apply_mask();
      net.l2.apply_mask();
      net.out.apply_mask();
    }
  }
}

// mask the ceil(k * remaining) weakest active connections in one matrix,
// never below one survivor and skipping the protected set; records which
// indices were masked and returns how many
std::size_t prune_matrix(MaskedLinear& layer, const std::vector<double>& scores, double k,
                         const std::vector<std::uint8_t>& protect,
                         std::vector<std::size_t>& masked_out) {
  const std::size_t remaining = layer.active_count();
  if (remaining <= 1) return 0;  // this layer is down to its last connection
  std::size_t quota = static_cast<std::size_t>(std::ceil(k * static_cast<double>(remaining)));
  quota = std::min(quota, remaining - 1);
  std::vector<std::size_t> active_idx;
  for (std::size_t i = 0; i < layer.mask.size(); ++i)
    if (layer.mask[i] && !protect[i]) active_idx.push_back(i);
  std::stable_sort(active_idx.begin(), active_idx.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  quota = std::min(quota, active_idx.size());
  for (std::size_t i = 0; i < quota; ++i) {
    layer.mask[active_idx[i]] = 0;
    masked_out.push_back(active_idx[i]);
  }
  layer.apply_mask();
  return quota;
}

}  // namespace

EqlResult train_prune_loop(const EqlSpec& spec, const Dataset& data, std::uint64_t seed,
                           const EqlTrainOptions& options) {
  spec.validate();
  if (data.size() < 50) throw std::invalid_argument("train_prune_loop: need >= 50 rows");

  EqlResult result;
  result.baseline_val_mse = fit_baseline(data, seed, options.init_epochs, options.val_fraction).val_mse;

  const bool warm = options.warm_start != nullptr;
  result.net = warm ? *options.warm_start : make_eql(spec, seed);
  EqlNetwork& net = result.net;
  if (warm && (net.spec.n_inputs != spec.n_inputs || net.total_weights() == 0))
    throw std::invalid_argument("train_prune_loop: warm start does not match the spec");

  Rng rng(Rng::mix(seed, 0xe92ull));
  const Split split = make_split(data.size(), options.val_fraction, rng);

  std::vector<const Tensor*> ps{&net.l1.W, &net.l1.b, &net.l2.W,
                                &net.l2.b, &net.out.W, &net.out.b};
  nd::AdamState adam = nd::adam_init(ps, options.lr);

  if (!warm) train_epochs(net, data, split.train, options.init_epochs, options.batch, adam, rng);
  double val_mse = eval_mse(net, data, split.val);
  result.history.push_back({net.sparsity(), val_mse});

  const double guard = options.mse_guard * std::max(result.baseline_val_mse, 1e-12);

  EqlNetwork best = net;
  double best_val = val_mse;

  std::vector<std::vector<double>> xs;
  xs.reserve(split.train.size());
  for (std::size_t i : split.train) xs.push_back(data.X[i]);

  // connections whose removal proved unrecoverable; skipped by later rounds
  std::vector<std::uint8_t> protect1(net.l1.mask.size(), 0);
  std::vector<std::uint8_t> protect2(net.l2.mask.size(), 0);
  std::vector<std::uint8_t> protect_out(net.out.mask.size(), 0);
  std::size_t retries_left = options.prune_retries;
  bool any_rollback = false;

  while (net.sparsity() < spec.target_sparsity) {
    const auto acts = net.forward(xs);  // calibration on the training split
    std::vector<std::size_t> m1, m2, mo;
    std::size_t masked = 0;
    masked += prune_matrix(net.l1, connection_contribution(net.l1, xs), spec.prune_fraction,
                           protect1, m1);
    masked += prune_matrix(net.l2, connection_contribution(net.l2, acts.h1), spec.prune_fraction,
                           protect2, m2);
    masked += prune_matrix(net.out, connection_contribution(net.out, acts.h2),
                           spec.prune_fraction, protect_out, mo);
    if (masked == 0) break;  // nothing left that may be pruned

    // retrain until the baseline acceptable error is reached again, in
    // slices; the guard only decides when a round failed. Fresh adam
    // moments: the loss surface changed shape under the new mask.
    adam = nd::adam_init(ps, options.lr);
    const double recover_to = std::max(result.baseline_val_mse, 1e-12);
    for (std::size_t slice = 0; slice < std::max<std::size_t>(1, options.recovery_slices);
         ++slice) {
      train_epochs(net, data, split.train, spec.retrain_epochs, options.batch, adam, rng);
      val_mse = eval_mse(net, data, split.val);
      if (val_mse <= recover_to) break;
    }

    if (val_mse > guard) {
      // roll back the round; protect the offending connections and try the
      // next-weakest ones instead, a bounded number of times
      net = best;
      val_mse = best_val;
      any_rollback = true;
      for (std::size_t i : m1) protect1[i] = 1;
      for (std::size_t i : m2) protect2[i] = 1;
      for (std::size_t i : mo) protect_out[i] = 1;
      if (retries_left == 0) {
        result.stopped_by_guard = true;
        break;
      }
      --retries_left;
      continue;
    }
    result.history.push_back({net.sparsity(), val_mse});
    best = net;
    best_val = val_mse;
  }

  // final polish: let the surviving connections settle before readout
  if (options.final_polish_epochs > 0) {
    adam = nd::adam_init(ps, options.lr);
    train_epochs(net, data, split.train, options.final_polish_epochs, options.batch, adam, rng);
    const double polished = eval_mse(net, data, split.val);
    if (polished <= val_mse || polished <= guard) {
      val_mse = polished;
    } else {
      net = best;  // polish made things worse; keep the recorded state
    }
  }

  result.final_val_mse = val_mse;
  result.reached_sparsity = net.sparsity() >= spec.target_sparsity;
  if (!result.reached_sparsity && any_rollback) result.stopped_by_guard = true;
  return result;
}

SymbolicExpr readout_equation(const EqlNetwork& net, const std::vector<std::string>& var_names,
                              std::size_t term_limit) {
  std::vector<Polynomial> inputs;
  for (std::size_t i = 0; i < net.spec.n_inputs; ++i) inputs.push_back(Polynomial::variable(i));

  auto affine = [&](const MaskedLinear& layer, const std::vector<Polynomial>& in,
                    std::size_t col) {
    Polynomial p = Polynomial::constant(layer.b.at(0, col));
    for (std::size_t i = 0; i < in.size(); ++i) {
      const double w = layer.W.at(i, col);
      if (w == 0.0) continue;
      p = poly_add(p, poly_scale(in[i], w), term_limit);
    }
    return p;
  };

  auto apply_layer = [&](const std::vector<Unit>& units, const MaskedLinear& layer,
                         const std::vector<Polynomial>& in) {
    std::vector<Polynomial> out;
    std::size_t slot = 0;
    for (Unit u : units) {
      switch (u) {
        case Unit::Identity:
          out.push_back(affine(layer, in, slot));
          slot += 1;
          break;
        case Unit::Square: {
          const Polynomial a = affine(layer, in, slot);
          out.push_back(poly_mul(a, a, term_limit));
          slot += 1;
          break;
        }
        case Unit::Sin:
        case Unit::Cos:
        case Unit::Sinh: {
          const Fn f = u == Unit::Sin ? Fn::Sin : (u == Unit::Cos ? Fn::Cos : Fn::Sinh);
          out.push_back(poly_func(f, affine(layer, in, slot)));
          slot += 1;
          break;
        }
        case Unit::Product: {
          const Polynomial a = affine(layer, in, slot);
          const Polynomial b = affine(layer, in, slot + 1);
          out.push_back(poly_mul(a, b, term_limit));
          slot += 2;
          break;
        }
      }
    }
    return out;
  };

  const auto h1 = apply_layer(net.spec.layer1, net.l1, inputs);
  const auto h2 = apply_layer(net.spec.layer2, net.l2, h1);

  SymbolicExpr expr;
  expr.poly = affine(net.out, h2, 0);
  expr.var_names = var_names;
  if (expr.var_names.empty())
    for (std::size_t i = 0; i < net.spec.n_inputs; ++i)
      expr.var_names.push_back("x" + std::to_string(i + 1));
  return expr;
}

}  // namespace sdlab::eql
