#include "sdlab/autodiff.hpp"

#include <cmath>

namespace sdlab::nd {

namespace {

void ensure(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument("ndiff: " + msg);
}

void check_finite(const Tensor& t, const char* op) {
  if (!t.all_finite()) throw std::runtime_error(std::string("ndiff: non-finite result in ") + op);
}

}  // namespace

Tensor Tensor::from_rows(const std::vector<std::vector<double>>& rows) {
  ensure(!rows.empty(), "from_rows: empty input");
  Tensor t(rows.size(), rows[0].size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    ensure(rows[r].size() == t.cols_, "from_rows: ragged rows");
    for (std::size_t c = 0; c < t.cols_; ++c) t.at(r, c) = rows[r][c];
  }
  return t;
}

double Tensor::item() const {
  if (size() != 1) throw std::invalid_argument("ndiff: item() on non-scalar tensor");
  return data_[0];
}

bool Tensor::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

double act_eval(Act a, double x) {
  switch (a) {
    case Act::Identity: return x;
    case Act::Relu: return x > 0.0 ? x : 0.0;
    case Act::LeakyRelu: return x > 0.0 ? x : 0.01 * x;
    case Act::Tanh: return std::tanh(x);
    case Act::Sin: return std::sin(x);
    case Act::Cos: return std::cos(x);
    case Act::Square: return x * x;
    case Act::Exp: return std::exp(x);
    case Act::Sinh: return std::sinh(x);
  }
  return x;
}

double act_grad(Act a, double x) {
  switch (a) {
    case Act::Identity: return 1.0;
    case Act::Relu: return x > 0.0 ? 1.0 : 0.0;
    case Act::LeakyRelu: return x > 0.0 ? 1.0 : 0.01;
    case Act::Tanh: {
      const double t = std::tanh(x);
      return 1.0 - t * t;
    }
    case Act::Sin: return std::cos(x);
    case Act::Cos: return -std::sin(x);
    case Act::Square: return 2.0 * x;
    case Act::Exp: return std::exp(x);
    case Act::Sinh: return std::cosh(x);
  }
  return 1.0;
}

const char* act_name(Act a) {
  switch (a) {
    case Act::Identity: return "identity";
    case Act::Relu: return "relu";
    case Act::LeakyRelu: return "leaky_relu";
    case Act::Tanh: return "tanh";
    case Act::Sin: return "sin";
    case Act::Cos: return "cos";
    case Act::Square: return "square";
    case Act::Exp: return "exp";
    case Act::Sinh: return "sinh";
  }
  return "?";
}

void matmul_into(const Tensor& a, const Tensor& b, Tensor& out) {
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  out = Tensor(n, m);
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  double* po = out.data().data();
  for (std::size_t i = 0; i < n; ++i) {
    const double* arow = pa + i * k;
    double* orow = po + i * m;
    for (std::size_t kk = 0; kk < k; ++kk) {
      const double av = arow[kk];
      if (av == 0.0) continue;
      const double* brow = pb + kk * m;
      for (std::size_t j = 0; j < m; ++j) orow[j] += av * brow[j];
    }
  }
}

Tensor matmul_plain(const Tensor& a, const Tensor& b) {
  ensure(a.cols() == b.rows(), "matmul: inner dims differ");
  Tensor out;
  matmul_into(a, b, out);
  return out;
}

int Tape::check(ValueRef r) const {
  if (r.id < 0 || r.id >= static_cast<int>(nodes_.size()))
    throw std::invalid_argument("ndiff: value is not on this tape");
  return r.id;
}

ValueRef Tape::push(Tensor value, bool requires_grad,
                    std::function<void(Tape&, const Tensor&)> backprop) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  n.backprop = std::move(backprop);
  nodes_.push_back(std::move(n));
  return ValueRef{static_cast<int>(nodes_.size()) - 1};
}

ValueRef Tape::leaf(Tensor value, bool requires_grad) {
  check_finite(value, "leaf");
  return push(std::move(value), requires_grad, nullptr);
}

void Tape::accumulate(int id, const Tensor& g) {
  Node& n = nodes_[id];
  if (!n.grad_ready) {
    n.grad = Tensor(n.value.rows(), n.value.cols());
    n.grad_ready = true;
  }
  for (std::size_t i = 0; i < g.size(); ++i) n.grad[i] += g[i];
}

const Tensor& Tape::grad(ValueRef r) const {
  const Node& n = nodes_[check(r)];
  if (!n.grad_ready) throw std::runtime_error("ndiff: no gradient; run backward() first");
  return n.grad;
}

ValueRef Tape::matmul(ValueRef ra, ValueRef rb) {
  const int ia = check(ra), ib = check(rb);
  const Tensor& a = nodes_[ia].value;
  const Tensor& b = nodes_[ib].value;
  ensure(a.cols() == b.rows(), "matmul: inner dims differ");
  Tensor out;
  matmul_into(a, b, out);
  check_finite(out, "matmul");
  const bool need = nodes_[ia].requires_grad || nodes_[ib].requires_grad;
  return push(std::move(out), need, [ia, ib](Tape& t, const Tensor& g) {
    const Tensor& a = t.nodes_[ia].value;
    const Tensor& b = t.nodes_[ib].value;
    if (t.nodes_[ia].requires_grad) {
      // dA = g . B^T
      Tensor da(a.rows(), a.cols());
      for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < b.cols(); ++j) {
          const double gv = g.at(i, j);
          if (gv == 0.0) continue;
          for (std::size_t kk = 0; kk < a.cols(); ++kk) da.at(i, kk) += gv * b.at(kk, j);
        }
      t.accumulate(ia, da);
    }
    if (t.nodes_[ib].requires_grad) {
      // dB = A^T . g
      Tensor db(b.rows(), b.cols());
      for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t kk = 0; kk < a.cols(); ++kk) {
          const double av = a.at(i, kk);
          if (av == 0.0) continue;
          for (std::size_t j = 0; j < b.cols(); ++j) db.at(kk, j) += av * g.at(i, j);
        }
      t.accumulate(ib, db);
    }
  });
}

ValueRef Tape::add(ValueRef ra, ValueRef rb) {
  const int ia = check(ra), ib = check(rb);
  const Tensor& a = nodes_[ia].value;
  const Tensor& b = nodes_[ib].value;
  const bool bcast = !a.same_shape(b);
  if (bcast) ensure(b.rows() == 1 && b.cols() == a.cols(), "add: shapes incompatible");
  Tensor out = a;
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) out.at(r, c) += bcast ? b.at(0, c) : b.at(r, c);
  check_finite(out, "add");
  const bool need = nodes_[ia].requires_grad || nodes_[ib].requires_grad;
  return push(std::move(out), need, [ia, ib, bcast](Tape& t, const Tensor& g) {
    if (t.nodes_[ia].requires_grad) t.accumulate(ia, g);
    if (t.nodes_[ib].requires_grad) {
      if (!bcast) {
        t.accumulate(ib, g);
      } else {
        Tensor gb(1, g.cols());
        for (std::size_t r = 0; r < g.rows(); ++r)
          for (std::size_t c = 0; c < g.cols(); ++c) gb.at(0, c) += g.at(r, c);
        t.accumulate(ib, gb);
      }
    }
  });
}

ValueRef Tape::sub(ValueRef a, ValueRef b) { return add(a, scale(b, -1.0)); }

ValueRef Tape::mul(ValueRef ra, ValueRef rb) {
  const int ia = check(ra), ib = check(rb);
  const Tensor& a = nodes_[ia].value;
  const Tensor& b = nodes_[ib].value;
  ensure(a.same_shape(b), "mul: shapes differ");
  Tensor out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b[i];
  check_finite(out, "mul");
  const bool need = nodes_[ia].requires_grad || nodes_[ib].requires_grad;
  return push(std::move(out), need, [ia, ib](Tape& t, const Tensor& g) {
    const Tensor& a = t.nodes_[ia].value;
    const Tensor& b = t.nodes_[ib].value;
    if (t.nodes_[ia].requires_grad) {
      Tensor da = g;
      for (std::size_t i = 0; i < da.size(); ++i) da[i] *= b[i];
      t.accumulate(ia, da);
    }
    if (t.nodes_[ib].requires_grad) {
      Tensor db = g;
      for (std::size_t i = 0; i < db.size(); ++i) db[i] *= a[i];
      t.accumulate(ib, db);
    }
  });
}

ValueRef Tape::scale(ValueRef ra, double k) {
  const int ia = check(ra);
  Tensor out = nodes_[ia].value;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= k;
  check_finite(out, "scale");
  return push(std::move(out), nodes_[ia].requires_grad, [ia, k](Tape& t, const Tensor& g) {
    if (!t.nodes_[ia].requires_grad) return;
    Tensor da = g;
    for (std::size_t i = 0; i < da.size(); ++i) da[i] *= k;
    t.accumulate(ia, da);
  });
}

ValueRef Tape::add_scalar(ValueRef ra, double k) {
  const int ia = check(ra);
  Tensor out = nodes_[ia].value;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += k;
  check_finite(out, "add_scalar");
  return push(std::move(out), nodes_[ia].requires_grad, [ia](Tape& t, const Tensor& g) {
    if (t.nodes_[ia].requires_grad) t.accumulate(ia, g);
  });
}

ValueRef Tape::apply(Act act, ValueRef ra) {
  const int ia = check(ra);
  Tensor out = nodes_[ia].value;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = act_eval(act, out[i]);
  check_finite(out, act_name(act));
  return push(std::move(out), nodes_[ia].requires_grad, [ia, act](Tape& t, const Tensor& g) {
    if (!t.nodes_[ia].requires_grad) return;
    const Tensor& x = t.nodes_[ia].value;
    Tensor da = g;
    for (std::size_t i = 0; i < da.size(); ++i) da[i] *= act_grad(act, x[i]);
    t.accumulate(ia, da);
  });
}

ValueRef Tape::sum(ValueRef ra) {
  const int ia = check(ra);
  const Tensor& a = nodes_[ia].value;
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i];
  Tensor out = Tensor::scalar(s);
  check_finite(out, "sum");
  return push(std::move(out), nodes_[ia].requires_grad, [ia](Tape& t, const Tensor& g) {
    if (!t.nodes_[ia].requires_grad) return;
    const Tensor& a = t.nodes_[ia].value;
    Tensor da(a.rows(), a.cols(), g[0]);
    t.accumulate(ia, da);
  });
}

ValueRef Tape::mean(ValueRef ra) {
  const std::size_t n = nodes_[check(ra)].value.size();
  return scale(sum(ra), 1.0 / static_cast<double>(n));
}

ValueRef Tape::mse(ValueRef pred, ValueRef target) {
  ValueRef d = sub(pred, target);
  return mean(mul(d, d));
}

ValueRef Tape::slice_cols(ValueRef ra, std::size_t first, std::size_t count) {
  const int ia = check(ra);
  const Tensor& a = nodes_[ia].value;
  ensure(first + count <= a.cols(), "slice_cols: range out of bounds");
  Tensor out(a.rows(), count);
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < count; ++c) out.at(r, c) = a.at(r, first + c);
  return push(std::move(out), nodes_[ia].requires_grad, [ia, first, count](Tape& t, const Tensor& g) {
    if (!t.nodes_[ia].requires_grad) return;
    const Tensor& a = t.nodes_[ia].value;
    Tensor da(a.rows(), a.cols());
    for (std::size_t r = 0; r < g.rows(); ++r)
      for (std::size_t c = 0; c < count; ++c) da.at(r, first + c) = g.at(r, c);
    t.accumulate(ia, da);
  });
}

ValueRef Tape::concat_cols(const std::vector<ValueRef>& parts) {
  ensure(!parts.empty(), "concat_cols: empty");
  std::vector<int> ids;
  std::size_t rows = nodes_[check(parts[0])].value.rows();
  std::size_t cols = 0;
  bool need = false;
  for (ValueRef p : parts) {
    const int id = check(p);
    ids.push_back(id);
    ensure(nodes_[id].value.rows() == rows, "concat_cols: row mismatch");
    cols += nodes_[id].value.cols();
    need = need || nodes_[id].requires_grad;
  }
  Tensor out(rows, cols);
  std::size_t off = 0;
  for (int id : ids) {
    const Tensor& v = nodes_[id].value;
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < v.cols(); ++c) out.at(r, off + c) = v.at(r, c);
    off += v.cols();
  }
  return push(std::move(out), need, [ids](Tape& t, const Tensor& g) {
    std::size_t off = 0;
    for (int id : ids) {
      const Tensor& v = t.nodes_[id].value;
      if (t.nodes_[id].requires_grad) {
        Tensor dv(v.rows(), v.cols());
        for (std::size_t r = 0; r < v.rows(); ++r)
          for (std::size_t c = 0; c < v.cols(); ++c) dv.at(r, c) = g.at(r, off + c);
        t.accumulate(id, dv);
      }
      off += v.cols();
    }
  });
}

ValueRef Tape::reshape(ValueRef ra, std::size_t rows, std::size_t cols) {
  const int ia = check(ra);
  const Tensor& a = nodes_[ia].value;
  ensure(rows * cols == a.size(), "reshape: size mismatch");
  Tensor out(rows, cols);
  out.data() = a.data();
  return push(std::move(out), nodes_[ia].requires_grad, [ia](Tape& t, const Tensor& g) {
    if (!t.nodes_[ia].requires_grad) return;
    const Tensor& a = t.nodes_[ia].value;
    Tensor da(a.rows(), a.cols());
    da.data() = g.data();
    t.accumulate(ia, da);
  });
}

void Tape::backward(ValueRef loss) {
  const int il = check(loss);
  if (nodes_[il].value.size() != 1)
    throw std::invalid_argument("ndiff: backward() needs a scalar loss");
  if (nodes_[il].backprop == nullptr && !nodes_[il].requires_grad)
    throw std::invalid_argument("ndiff: backward() on a constant leaf");
  if (ran_backward_) throw std::runtime_error("ndiff: backward() already ran on this tape");
  ran_backward_ = true;

  accumulate(il, Tensor::scalar(1.0));
  for (int i = il; i >= 0; --i) {
    Node& n = nodes_[i];
    if (!n.grad_ready || !n.backprop) continue;
    if (!n.requires_grad) continue;
    n.backprop(*this, n.grad);
  }
}

}  // namespace sdlab::nd
