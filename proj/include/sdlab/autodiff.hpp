#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sdlab::nd {

// Dense row-major matrix of doubles. Everything is rank-2: vectors are
// 1 x n or n x 1, scalars are 1 x 1. Ops never mutate their inputs.
class Tensor {
 public:
  Tensor() = default;
  Tensor(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Tensor scalar(double v) {
    Tensor t(1, 1);
    t.data_[0] = v;
    return t;
  }
  static Tensor row(const std::vector<double>& v) {
    Tensor t(1, v.size());
    t.data_ = v;
    return t;
  }
  static Tensor col(const std::vector<double>& v) {
    Tensor t(v.size(), 1);
    t.data_ = v;
    return t;
  }
  static Tensor from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool same_shape(const Tensor& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

  double& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double item() const;

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool all_finite() const;

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> data_;
};

// Elementwise activations available as tape primitives. The set is fixed;
// networks are assembled from these plus matmul/add/mul/reductions.
enum class Act { Identity, Relu, LeakyRelu, Tanh, Sin, Cos, Square, Exp, Sinh };

double act_eval(Act a, double x);
double act_grad(Act a, double x);
const char* act_name(Act a);

struct ValueRef {
  int id = -1;
  bool valid() const { return id >= 0; }
};

// Reverse-mode tape. Build a fresh tape per forward pass; leaves carry the
// parameters. backward() visits nodes in reverse insertion order, which is
// a topological order by construction.
class Tape {
 public:
  ValueRef leaf(Tensor value, bool requires_grad = false);
  ValueRef constant(Tensor value) { return leaf(std::move(value), false); }

  ValueRef matmul(ValueRef a, ValueRef b);
  // same-shape add, or broadcast of a 1 x n row over every row of a
  ValueRef add(ValueRef a, ValueRef b);
  ValueRef sub(ValueRef a, ValueRef b);
  ValueRef mul(ValueRef a, ValueRef b);  // elementwise
  ValueRef scale(ValueRef a, double k);
  ValueRef add_scalar(ValueRef a, double k);
  ValueRef apply(Act act, ValueRef a);
  ValueRef sum(ValueRef a);
  ValueRef mean(ValueRef a);
  ValueRef mse(ValueRef pred, ValueRef target);
  ValueRef slice_cols(ValueRef a, std::size_t first, std::size_t count);
  ValueRef concat_cols(const std::vector<ValueRef>& parts);
  ValueRef reshape(ValueRef a, std::size_t rows, std::size_t cols);

  void backward(ValueRef loss);

  const Tensor& value(ValueRef r) const { return nodes_[check(r)].value; }
  const Tensor& grad(ValueRef r) const;
  bool requires_grad(ValueRef r) const { return nodes_[check(r)].requires_grad; }
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    bool grad_ready = false;
    std::function<void(Tape&, const Tensor&)> backprop;  // null for leaves
  };

  int check(ValueRef r) const;
  ValueRef push(Tensor value, bool requires_grad,
                std::function<void(Tape&, const Tensor&)> backprop);
  void accumulate(int id, const Tensor& g);

  std::vector<Node> nodes_;
  bool ran_backward_ = false;
};

// in-place helpers used by the tape and the optimizers
void matmul_into(const Tensor& a, const Tensor& b, Tensor& out);
Tensor matmul_plain(const Tensor& a, const Tensor& b);

}  // namespace sdlab::nd
