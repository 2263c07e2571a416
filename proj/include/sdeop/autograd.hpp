#pragma once

// Reverse-mode automatic differentiation on a dynamic tape.
//
// A Tape owns every intermediate value of one forward computation.  Ops
// append nodes and return lightweight Var handles; backward(out) walks the
// node list in reverse, accumulating gradients for every node that
// (transitively) depends on a gradient-carrying leaf.  Graphs are rebuilt
// per evaluation -- there is no implicit global state.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "sdeop/tensor.hpp"

namespace sdeop {

class Tape;

// Handle to a node on a tape.  Cheap to copy; valid until the tape is cleared.
struct Var {
  Tape* tape = nullptr;
  int node = -1;
};

class Tape {
 public:
  // Gradient-carrying input (weights) or plain data (requires_grad = false).
  Var leaf(Tensor value);
  Var constant(Tensor value) {
    value.requires_grad = false;
    return leaf(std::move(value));
  }

  const Tensor& value(Var v) const { return nodes_[v.node].value; }
  // Valid after backward().  A gradient-carrying leaf always has a gradient
  // of its own shape (all zeros when it does not feed the output); other
  // nodes off the gradient path return an empty tensor.
  const Tensor& grad(Var v) const;

  // Seeds d(out)/d(out) = 1 and accumulates gradients for all antecedents.
  // `out` must be scalar (size 1).
  void backward(Var out);

  void clear();
  std::size_t size() const { return nodes_.size(); }

 private:
  enum class Op { Leaf, MatMul, Add, Sub, Scale, Tanh, Sigmoid, Concat, Dot, MeanSq };

  struct Node {
    Op op = Op::Leaf;
    int a = -1, b = -1;
    double factor = 0.0;  // Scale only
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    bool grad_live = false;  // grad allocated during the current backward
  };

  friend Var matmul(Var, Var);
  friend Var add(Var, Var);
  friend Var sub(Var, Var);
  friend Var scale(Var, double);
  friend Var tanh(Var);
  friend Var sigmoid(Var);
  friend Var concat(Var, Var);
  friend Var dot(Var, Var);
  friend Var mean_sq(Var);

  int push(Node node) {
    nodes_.push_back(std::move(node));
    return static_cast<int>(nodes_.size()) - 1;
  }
  static Var binary_elementwise(Var a, Var b, Op op, const char* name);
  template <typename F>
  static Var unary_elementwise(Var a, Op op, F f);
  Tensor& grad_buffer(int node);
  void backward_node(int id);

  std::vector<Node> nodes_;
  Tensor zero_;  // returned for nodes without a gradient
};

// Primitive ops.  Both operands must live on the same tape.  Shape rules:
//   matmul  {r,k} x {k}   -> {r}      (matrix * column vector)
//           {r,k} x {k,c} -> {r,c}
//   add/sub elementwise, identical shapes
//   scale   any, by a plain double (not differentiated w.r.t. the factor)
//   tanh/sigmoid elementwise
//   concat  {n} ++ {m} -> {n+m}       (vectors only)
//   dot     {n} . {n} -> {1}
//   mean_sq any -> {1}, mean of squared entries
Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var scale(Var a, double factor);
Var tanh(Var a);
Var sigmoid(Var a);
Var concat(Var a, Var b);
Var dot(Var a, Var b);
Var mean_sq(Var a);

// Builds a scalar loss from gradient-carrying leaves made of `params`.
// Must be pure: same params, same tape content.
using ScalarBuilder = std::function<Var(Tape&, const std::vector<Var>&)>;

// Compares reverse-mode gradients against central finite differences on
// `n_coords` randomly chosen coordinates (sampled via `seed`).  Returns the
// worst relative error  |ad - fd| / max(|fd|, 1e-8).
double grad_check(const ScalarBuilder& build, std::vector<Tensor> params, double eps,
                  int n_coords, std::uint64_t seed);

}  // namespace sdeop
