#pragma once

#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "ldp/tensor.hpp"

namespace ldp {

// Named persistent parameter tensors; models own one store each and the
// optimizer updates it in place between tapes.
class ParamStore {
 public:
  int add(std::string name, Tensor value);
  int size() const { return static_cast<int>(values_.size()); }
  Tensor& value(int i) { return values_[static_cast<std::size_t>(i)]; }
  const Tensor& value(int i) const { return values_[static_cast<std::size_t>(i)]; }
  const std::string& name(int i) const { return names_[static_cast<std::size_t>(i)]; }
  std::int64_t total_count() const;

 private:
  std::vector<std::string> names_;
  std::vector<Tensor> values_;
};

class Tape;

// Handle to a node on a tape.
struct Var {
  Tape* tape = nullptr;
  int id = -1;
  const Tensor& val() const;
};

// Define-by-run graph, rebuilt per forward pass. Creation order is the
// topological order; backward() walks it once in reverse. Every op checks its
// output for non-finite values and throws, so NaN/Inf never propagates.
class Tape {
 public:
  explicit Tape(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}

  bool grad_enabled() const { return grad_enabled_; }

  Var leaf(Tensor value, bool trainable = false);
  // Leaf backed by a store parameter; one node per (store, index) per tape.
  Var param(ParamStore& store, int index);

  void backward(Var loss);

  const Tensor& value(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  bool requires(int id) const { return nodes_[static_cast<std::size_t>(id)].requires_grad; }
  // Lazily zero-initialized gradient buffer for a node.
  Tensor& grad_buf(int id);
  // Gradient of a node after backward(); zero tensor if it never received one.
  Tensor grad_of(Var v) const;
  // Gradients aligned with the store; exact zero tensors for unused params.
  std::vector<Tensor> param_grads(const ParamStore& store) const;

  int push(const char* op, Tensor value, bool requires_grad);
  void set_backward(int id, std::function<void(Tape&)> fn);
  int size() const { return static_cast<int>(nodes_.size()); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;  // empty until first accumulation
    bool requires_grad = false;
    std::function<void(Tape&)> backward;
  };

  std::vector<Node> nodes_;
  std::unordered_map<const ParamStore*, std::vector<int>> param_nodes_;
  bool grad_enabled_ = true;
  bool ran_backward_ = false;
};

// Elementwise; operands must have identical shapes.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var x, double c);
Var add_scalar(Var x, double c);
Var exp(Var x);
Var silu(Var x);
Var relu(Var x);
Var sigmoid(Var x);

// (M,K) x (K,N) -> (M,N)
Var matmul(Var a, Var b);
// x (B,I), w (I,O), b (O) -> (B,O)
Var linear(Var x, Var w, Var b);

// x (B,Ci,L), w (Co,Ci,K), b (Co)
Var conv1d(Var x, Var w, Var b, int stride, int pad);
// x (B,Ci,L), w (Ci,Co,K), b (Co); length (L-1)*stride - 2*pad + K
Var conv_transpose1d(Var x, Var w, Var b, int stride, int pad);
// x (B,Ci,H,W), w (Co,Ci,Kh,Kw), b (Co)
Var conv2d(Var x, Var w, Var b, int stride, int pad);
// x (B,Ci,H,W), w (Ci,Co,Kh,Kw), b (Co)
Var conv_transpose2d(Var x, Var w, Var b, int stride, int pad);

// x (B,C,spatial...), gamma/beta (C); stats per (sample, group) in double.
Var group_norm(Var x, int groups, Var gamma, Var beta, double eps = 1e-5);
// x (B,F), gamma/beta (F); stats per row.
Var layer_norm(Var x, Var gamma, Var beta, double eps = 1e-5);
// x (B,C,L), scale/shift (B,C): y = x * (1 + scale) + shift.
Var film(Var x, Var scale, Var shift);

Var reshape(Var x, std::vector<int> new_shape);
// (B,A,C) -> (B,C,A)
Var transpose_12(Var x);
Var concat(const std::vector<Var>& xs, int axis);
Var slice(Var x, int axis, int start, int len);

// Scalar reductions; accumulate in double.
Var sum_all(Var x);
Var mean_all(Var x);
Var mse(Var a, Var b);

}  // namespace ldp
