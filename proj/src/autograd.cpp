#include "sdeop/autograd.hpp"

#include <cmath>
#include <stdexcept>

#include "sdeop/rng.hpp"

namespace sdeop {

namespace {

void check_same_tape(Var a, Var b, const char* op) {
  if (a.tape == nullptr || b.tape == nullptr || a.tape != b.tape) {
    throw std::invalid_argument(std::string(op) + ": operands must live on one tape");
  }
}

[[noreturn]] void shape_error(const char* op, const Tensor& a, const Tensor& b) {
  throw std::invalid_argument(std::string(op) + ": incompatible shapes " + shape_string(a) +
                              " vs " + shape_string(b));
}

}  // namespace

Var Tape::leaf(Tensor value) {
  Node node;
  node.requires_grad = value.requires_grad;
  node.value = std::move(value);
  return Var{this, push(std::move(node))};
}

const Tensor& Tape::grad(Var v) const {
  const Node& node = nodes_[v.node];
  return node.grad_live ? node.grad : zero_;
}

void Tape::clear() {
  nodes_.clear();
  zero_ = Tensor();
}

Tensor& Tape::grad_buffer(int id) {
  Node& node = nodes_[id];
  if (!node.grad_live) {
    if (node.grad.data.size() == node.value.data.size()) {
      std::fill(node.grad.data.begin(), node.grad.data.end(), 0.0);
      node.grad.shape = node.value.shape;
    } else {
      node.grad = Tensor::zeros(node.value.shape);
    }
    node.grad_live = true;
  }
  return node.grad;
}

void Tape::backward(Var out) {
  if (out.tape != this) throw std::invalid_argument("backward: Var from another tape");
  Node& last = nodes_[out.node];
  if (last.value.size() != 1) {
    throw std::invalid_argument("backward: output must be scalar, got shape " +
                                shape_string(last.value));
  }
  for (auto& node : nodes_) node.grad_live = false;
  // every gradient-carrying leaf gets a well-formed (possibly all-zero) grad
  for (int id = 0; id < static_cast<int>(nodes_.size()); ++id) {
    if (nodes_[id].op == Op::Leaf && nodes_[id].requires_grad) grad_buffer(id);
  }
  if (!last.requires_grad) return;  // nothing reaches a gradient leaf
  grad_buffer(out.node).data[0] = 1.0;
  for (int id = out.node; id >= 0; --id) {
    if (nodes_[id].requires_grad && nodes_[id].grad_live) backward_node(id);
  }
}

void Tape::backward_node(int id) {
  Node& node = nodes_[id];
  const Tensor& g = node.grad;
  const auto needs = [&](int input) { return input >= 0 && nodes_[input].requires_grad; };

  switch (node.op) {
    case Op::Leaf:
      break;
    case Op::MatMul: {
      const Tensor& a = nodes_[node.a].value;
      const Tensor& b = nodes_[node.b].value;
      const int r = a.shape[0];
      const int k = a.shape[1];
      const int c = b.rank() == 2 ? b.shape[1] : 1;
      if (needs(node.a)) {
        Tensor& da = grad_buffer(node.a);
        // dA = g * B^T
        for (int i = 0; i < r; ++i) {
          for (int j = 0; j < k; ++j) {
            double sum = 0.0;
            for (int l = 0; l < c; ++l) sum += g.data[i * c + l] * b.data[j * c + l];
            da.data[i * k + j] += sum;
          }
        }
      }
      if (needs(node.b)) {
        Tensor& db = grad_buffer(node.b);
        // dB = A^T * g
        for (int j = 0; j < k; ++j) {
          for (int l = 0; l < c; ++l) {
            double sum = 0.0;
            for (int i = 0; i < r; ++i) sum += a.data[i * k + j] * g.data[i * c + l];
            db.data[j * c + l] += sum;
          }
        }
      }
      break;
    }
    case Op::Add:
    case Op::Sub: {
      const double sign_b = node.op == Op::Add ? 1.0 : -1.0;
      if (needs(node.a)) {
        Tensor& da = grad_buffer(node.a);
        for (std::size_t i = 0; i < g.data.size(); ++i) da.data[i] += g.data[i];
      }
      if (needs(node.b)) {
        Tensor& db = grad_buffer(node.b);
        for (std::size_t i = 0; i < g.data.size(); ++i) db.data[i] += sign_b * g.data[i];
      }
      break;
    }
    case Op::Scale: {
      if (needs(node.a)) {
        Tensor& da = grad_buffer(node.a);
        for (std::size_t i = 0; i < g.data.size(); ++i) da.data[i] += node.factor * g.data[i];
      }
      break;
    }
    case Op::Tanh: {
      if (needs(node.a)) {
        Tensor& da = grad_buffer(node.a);
        for (std::size_t i = 0; i < g.data.size(); ++i) {
          const double y = node.value.data[i];
          da.data[i] += (1.0 - y * y) * g.data[i];
        }
      }
      break;
    }
    case Op::Sigmoid: {
      if (needs(node.a)) {
        Tensor& da = grad_buffer(node.a);
        for (std::size_t i = 0; i < g.data.size(); ++i) {
          const double y = node.value.data[i];
          da.data[i] += y * (1.0 - y) * g.data[i];
        }
      }
      break;
    }
    case Op::Concat: {
      const std::size_t na = nodes_[node.a].value.size();
      if (needs(node.a)) {
        Tensor& da = grad_buffer(node.a);
        for (std::size_t i = 0; i < na; ++i) da.data[i] += g.data[i];
      }
      if (needs(node.b)) {
        Tensor& db = grad_buffer(node.b);
        for (std::size_t i = 0; i < db.data.size(); ++i) db.data[i] += g.data[na + i];
      }
      break;
    }
    case Op::Dot: {
      const Tensor& a = nodes_[node.a].value;
      const Tensor& b = nodes_[node.b].value;
      const double g0 = g.data[0];
      if (needs(node.a)) {
        Tensor& da = grad_buffer(node.a);
        for (std::size_t i = 0; i < a.data.size(); ++i) da.data[i] += g0 * b.data[i];
      }
      if (needs(node.b)) {
        Tensor& db = grad_buffer(node.b);
        for (std::size_t i = 0; i < b.data.size(); ++i) db.data[i] += g0 * a.data[i];
      }
      break;
    }
    case Op::MeanSq: {
      if (needs(node.a)) {
        const Tensor& a = nodes_[node.a].value;
        Tensor& da = grad_buffer(node.a);
        const double w = 2.0 * g.data[0] / static_cast<double>(a.data.size());
        for (std::size_t i = 0; i < a.data.size(); ++i) da.data[i] += w * a.data[i];
      }
      break;
    }
  }
}

Var matmul(Var a, Var b) {
  check_same_tape(a, b, "matmul");
  Tape& tape = *a.tape;
  const Tensor& ta = tape.value(a);
  const Tensor& tb = tape.value(b);
  if (ta.rank() != 2) shape_error("matmul", ta, tb);
  const int r = ta.shape[0];
  const int k = ta.shape[1];
  Tape::Node node;
  node.op = Tape::Op::MatMul;
  node.a = a.node;
  node.b = b.node;
  node.requires_grad = ta.requires_grad || tb.requires_grad;
  if (tb.rank() == 1) {
    if (tb.shape[0] != k) shape_error("matmul", ta, tb);
    node.value = Tensor::zeros({r});
    for (int i = 0; i < r; ++i) {
      double sum = 0.0;
      const double* row = ta.data.data() + static_cast<std::size_t>(i) * k;
      for (int j = 0; j < k; ++j) sum += row[j] * tb.data[j];
      node.value.data[i] = sum;
    }
  } else {
    if (tb.shape[0] != k) shape_error("matmul", ta, tb);
    const int c = tb.shape[1];
    node.value = Tensor::zeros({r, c});
    for (int i = 0; i < r; ++i) {
      for (int l = 0; l < c; ++l) {
        double sum = 0.0;
        for (int j = 0; j < k; ++j) sum += ta.data[i * k + j] * tb.data[j * c + l];
        node.value.data[i * c + l] = sum;
      }
    }
  }
  node.value.requires_grad = node.requires_grad;
  return Var{&tape, tape.push(std::move(node))};
}

Var add(Var a, Var b) { return Tape::binary_elementwise(a, b, Tape::Op::Add, "add"); }
Var sub(Var a, Var b) { return Tape::binary_elementwise(a, b, Tape::Op::Sub, "sub"); }

Var Tape::binary_elementwise(Var a, Var b, Tape::Op op, const char* name) {
  check_same_tape(a, b, name);
  Tape& tape = *a.tape;
  const Tensor& ta = tape.value(a);
  const Tensor& tb = tape.value(b);
  if (ta.shape != tb.shape) shape_error(name, ta, tb);
  Tape::Node node;
  node.op = op;
  node.a = a.node;
  node.b = b.node;
  node.requires_grad = ta.requires_grad || tb.requires_grad;
  node.value = Tensor(ta.shape, std::vector<double>(ta.data.size()));
  const double sign = op == Tape::Op::Add ? 1.0 : -1.0;
  for (std::size_t i = 0; i < ta.data.size(); ++i) {
    node.value.data[i] = ta.data[i] + sign * tb.data[i];
  }
  node.value.requires_grad = node.requires_grad;
  return Var{&tape, tape.push(std::move(node))};
}

Var scale(Var a, double factor) {
  Tape& tape = *a.tape;
  const Tensor& ta = tape.value(a);
  Tape::Node node;
  node.op = Tape::Op::Scale;
  node.a = a.node;
  node.factor = factor;
  node.requires_grad = ta.requires_grad;
  node.value = Tensor(ta.shape, std::vector<double>(ta.data.size()));
  for (std::size_t i = 0; i < ta.data.size(); ++i) node.value.data[i] = factor * ta.data[i];
  node.value.requires_grad = node.requires_grad;
  return Var{&tape, tape.push(std::move(node))};
}

template <typename F>
Var Tape::unary_elementwise(Var a, Tape::Op op, F f) {
  Tape& tape = *a.tape;
  const Tensor& ta = tape.value(a);
  Tape::Node node;
  node.op = op;
  node.a = a.node;
  node.requires_grad = ta.requires_grad;
  node.value = Tensor(ta.shape, std::vector<double>(ta.data.size()));
  for (std::size_t i = 0; i < ta.data.size(); ++i) node.value.data[i] = f(ta.data[i]);
  node.value.requires_grad = node.requires_grad;
  return Var{&tape, tape.push(std::move(node))};
}

Var tanh(Var a) {
  return Tape::unary_elementwise(a, Tape::Op::Tanh, [](double x) { return std::tanh(x); });
}

Var sigmoid(Var a) {
  return Tape::unary_elementwise(a, Tape::Op::Sigmoid,
                                 [](double x) { return 1.0 / (1.0 + std::exp(-x)); });
}

Var concat(Var a, Var b) {
  check_same_tape(a, b, "concat");
  Tape& tape = *a.tape;
  const Tensor& ta = tape.value(a);
  const Tensor& tb = tape.value(b);
  if (ta.rank() != 1 || tb.rank() != 1) shape_error("concat", ta, tb);
  Tape::Node node;
  node.op = Tape::Op::Concat;
  node.a = a.node;
  node.b = b.node;
  node.requires_grad = ta.requires_grad || tb.requires_grad;
  node.value = Tensor::zeros({ta.shape[0] + tb.shape[0]});
  std::copy(ta.data.begin(), ta.data.end(), node.value.data.begin());
  std::copy(tb.data.begin(), tb.data.end(), node.value.data.begin() + ta.data.size());
  node.value.requires_grad = node.requires_grad;
  return Var{&tape, tape.push(std::move(node))};
}

Var dot(Var a, Var b) {
  check_same_tape(a, b, "dot");
  Tape& tape = *a.tape;
  const Tensor& ta = tape.value(a);
  const Tensor& tb = tape.value(b);
  if (ta.rank() != 1 || tb.rank() != 1 || ta.shape != tb.shape) shape_error("dot", ta, tb);
  Tape::Node node;
  node.op = Tape::Op::Dot;
  node.a = a.node;
  node.b = b.node;
  node.requires_grad = ta.requires_grad || tb.requires_grad;
  double sum = 0.0;
  for (std::size_t i = 0; i < ta.data.size(); ++i) sum += ta.data[i] * tb.data[i];
  node.value = Tensor::scalar(sum);
  node.value.requires_grad = node.requires_grad;
  return Var{&tape, tape.push(std::move(node))};
}

Var mean_sq(Var a) {
  Tape& tape = *a.tape;
  const Tensor& ta = tape.value(a);
  Tape::Node node;
  node.op = Tape::Op::MeanSq;
  node.a = a.node;
  node.requires_grad = ta.requires_grad;
  double sum = 0.0;
  for (double v : ta.data) sum += v * v;
  node.value = Tensor::scalar(sum / static_cast<double>(ta.data.size()));
  node.value.requires_grad = node.requires_grad;
  return Var{&tape, tape.push(std::move(node))};
}

double grad_check(const ScalarBuilder& build, std::vector<Tensor> params, double eps,
                  int n_coords, std::uint64_t seed) {
  if (eps <= 0.0) throw std::invalid_argument("grad_check: eps must be positive");
  if (n_coords <= 0) throw std::invalid_argument("grad_check: n_coords must be positive");

  const auto run = [&](bool with_grad, std::vector<Tensor>* grads) {
    Tape tape;
    std::vector<Var> leaves;
    leaves.reserve(params.size());
    for (auto& p : params) {
      Tensor t = p;
      t.requires_grad = with_grad;
      leaves.push_back(tape.leaf(std::move(t)));
    }
    Var out = build(tape, leaves);
    const double value = tape.value(out).data[0];
    if (with_grad) {
      tape.backward(out);
      grads->clear();
      for (Var leaf : leaves) grads->push_back(tape.grad(leaf));
    }
    return value;
  };

  std::vector<Tensor> grads;
  run(true, &grads);

  // flat coordinate space across all parameter tensors
  std::size_t total = 0;
  for (const auto& p : params) total += p.size();
  if (total == 0) throw std::invalid_argument("grad_check: no parameters");

  rng::GaussianStream stream(seed);
  double worst = 0.0;
  for (int c = 0; c < n_coords; ++c) {
    const std::size_t flat =
        std::min(total - 1, static_cast<std::size_t>(stream.uniform_at(c) *
                                                     static_cast<double>(total)));
    std::size_t tensor_id = 0;
    std::size_t offset = flat;
    while (offset >= params[tensor_id].size()) {
      offset -= params[tensor_id].size();
      ++tensor_id;
    }
    double& coord = params[tensor_id].data[offset];
    const double saved = coord;
    coord = saved + eps;
    const double up = run(false, nullptr);
    coord = saved - eps;
    const double down = run(false, nullptr);
    coord = saved;
    const double fd = (up - down) / (2.0 * eps);
    const double ad = grads[tensor_id].data.empty() ? 0.0 : grads[tensor_id].data[offset];
    const double rel = std::abs(ad - fd) / std::max(std::abs(fd), 1e-8);
    worst = std::max(worst, rel);
  }
  return worst;
}

}  // namespace sdeop
