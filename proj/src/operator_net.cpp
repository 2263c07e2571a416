#include "sdeop/operator_net.hpp"

#include <cmath>
#include <stdexcept>

#include "sdeop/rng.hpp"

namespace sdeop {

namespace {

double activate(Activation act, double x) {
  return act == Activation::Tanh ? std::tanh(x) : 1.0 / (1.0 + std::exp(-x));
}

Var activate(Activation act, Var x) {
  return act == Activation::Tanh ? tanh(x) : sigmoid(x);
}

// Glorot-uniform fill from the tensor's own stream; entries row-major.
void glorot_fill(Tensor& t, int fan_in, int fan_out, std::uint64_t seed) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  rng::GaussianStream stream(seed);
  for (std::size_t i = 0; i < t.data.size(); ++i) {
    t.data[i] = bound * (2.0 * stream.uniform_at(i) - 1.0);
  }
}

}  // namespace

void NetConfig::validate() const {
  if (rnn_hidden < 1) throw std::invalid_argument("net: rnn_hidden must be >= 1");
  if (p < 1) throw std::invalid_argument("net: p must be >= 1");
  if (branch_layers.empty() || trunk_layers.empty()) {
    throw std::invalid_argument("net: branch and trunk need at least one layer");
  }
  for (int w : branch_layers) {
    if (w < 1) throw std::invalid_argument("net: branch layer widths must be >= 1");
  }
  for (int w : trunk_layers) {
    if (w < 1) throw std::invalid_argument("net: trunk layer widths must be >= 1");
  }
  if (branch_layers.back() != p || trunk_layers.back() != p) {
    throw std::invalid_argument(
        "net: inconsistent output widths: branch ends at " +
        std::to_string(branch_layers.back()) + ", trunk ends at " +
        std::to_string(trunk_layers.back()) + ", p = " + std::to_string(p));
  }
  double prev = -1.0;
  for (double t : sensor_times) {
    if (!std::isfinite(t) || t < 0.0) {
      throw std::invalid_argument("net: sensor times must be finite and >= 0");
    }
    if (t <= prev) throw std::invalid_argument("net: sensor times must be strictly increasing");
    prev = t;
  }
}

std::vector<Tensor*> DeepONetParams::tensors() {
  std::vector<Tensor*> out{&rnn_w_in, &rnn_w_rec, &rnn_bias};
  for (std::size_t l = 0; l < branch_w.size(); ++l) {
    out.push_back(&branch_w[l]);
    out.push_back(&branch_b[l]);
  }
  for (std::size_t l = 0; l < trunk_w.size(); ++l) {
    out.push_back(&trunk_w[l]);
    out.push_back(&trunk_b[l]);
  }
  return out;
}

std::vector<const Tensor*> DeepONetParams::tensors() const {
  auto mutable_view = const_cast<DeepONetParams*>(this)->tensors();
  return std::vector<const Tensor*>(mutable_view.begin(), mutable_view.end());
}

std::vector<std::string> DeepONetParams::tensor_names() const {
  std::vector<std::string> names{"rnn_w_in", "rnn_w_rec", "rnn_bias"};
  for (std::size_t l = 0; l < branch_w.size(); ++l) {
    names.push_back("branch_w" + std::to_string(l));
    names.push_back("branch_b" + std::to_string(l));
  }
  for (std::size_t l = 0; l < trunk_w.size(); ++l) {
    names.push_back("trunk_w" + std::to_string(l));
    names.push_back("trunk_b" + std::to_string(l));
  }
  return names;
}

std::size_t DeepONetParams::param_count() const {
  std::size_t n = 0;
  for (const Tensor* t : tensors()) n += t->size();
  return n;
}

DeepONetParams init_params(const NetConfig& config) {
  config.validate();
  DeepONetParams params;
  params.config = config;
  const int H = config.rnn_hidden;
  params.rnn_w_in = Tensor::zeros({H});
  params.rnn_w_rec = Tensor::zeros({H, H});
  params.rnn_bias = Tensor::zeros({H});

  int in = H + 1;  // encoding spliced with x0
  for (int width : config.branch_layers) {
    params.branch_w.push_back(Tensor::zeros({width, in}));
    params.branch_b.push_back(Tensor::zeros({width}));
    in = width;
  }
  in = 1;  // query time
  for (int width : config.trunk_layers) {
    params.trunk_w.push_back(Tensor::zeros({width, in}));
    params.trunk_b.push_back(Tensor::zeros({width}));
    in = width;
  }

  // weights drawn per tensor index (biases stay zero but keep their index)
  std::uint64_t index = 0;
  for (Tensor* t : params.tensors()) {
    const std::uint64_t seed = rng::derive_seed(config.init_seed, index++);
    if (t->rank() == 2) {
      glorot_fill(*t, t->shape[1], t->shape[0], seed);
    } else if (t == &params.rnn_w_in) {
      glorot_fill(*t, 1, H, seed);
    }
    // rank-1 non-input tensors are biases: zero
  }
  return params;
}

std::vector<double> branch_inputs(const NetConfig& config, std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("branch_inputs: empty path");
  std::vector<double> out(values.begin(), values.end());
  if (config.branch_input == BranchInput::Increments) {
    for (std::size_t j = out.size() - 1; j > 0; --j) out[j] -= out[j - 1];
  }
  return out;
}

std::vector<double> encode_path(const DeepONetParams& params, std::span<const double> inputs) {
  if (inputs.empty()) throw std::invalid_argument("encode_path: empty input sequence");
  const int H = params.config.rnn_hidden;
  std::vector<double> h(H, 0.0), next(H);
  for (double u : inputs) {
    if (!std::isfinite(u)) throw std::invalid_argument("encode_path: non-finite input");
    for (int i = 0; i < H; ++i) {
      // matches the taped graph: (w_in*u + W_rec h) + bias, row dot ascending
      double rec = 0.0;
      const double* row = params.rnn_w_rec.data.data() + static_cast<std::size_t>(i) * H;
      for (int j = 0; j < H; ++j) rec += row[j] * h[j];
      next[i] = activate(params.config.activation,
                         (params.rnn_w_in.data[i] * u + rec) + params.rnn_bias.data[i]);
    }
    h.swap(next);
  }
  return h;
}

namespace {

// One affine layer y = W x + b matching add(matmul(W, x), b) bit for bit.
std::vector<double> affine(const Tensor& w, const Tensor& b, std::span<const double> x) {
  const int rows = w.shape[0];
  const int cols = w.shape[1];
  std::vector<double> y(rows);
  for (int i = 0; i < rows; ++i) {
    double sum = 0.0;
    const double* row = w.data.data() + static_cast<std::size_t>(i) * cols;
    for (int j = 0; j < cols; ++j) sum += row[j] * x[j];
    y[i] = sum + b.data[i];
  }
  return y;
}

}  // namespace

std::vector<double> branch_forward(const DeepONetParams& params, std::span<const double> hidden,
                                   double x0) {
  const int H = params.config.rnn_hidden;
  if (static_cast<int>(hidden.size()) != H) {
    throw std::invalid_argument("branch_forward: encoding size " +
                                std::to_string(hidden.size()) + " != rnn_hidden " +
                                std::to_string(H));
  }
  std::vector<double> x(hidden.begin(), hidden.end());
  x.push_back(x0);
  const std::size_t layers = params.branch_w.size();
  for (std::size_t l = 0; l < layers; ++l) {
    x = affine(params.branch_w[l], params.branch_b[l], x);
    if (l + 1 < layers) {
      for (double& v : x) v = activate(params.config.activation, v);
    }
  }
  return x;  // terminal layer affine
}

std::vector<double> trunk_forward(const DeepONetParams& params, double t) {
  if (!std::isfinite(t)) throw std::invalid_argument("trunk_forward: query time must be finite");
  std::vector<double> x{t};
  for (std::size_t l = 0; l < params.trunk_w.size(); ++l) {
    x = affine(params.trunk_w[l], params.trunk_b[l], x);
    for (double& v : x) v = activate(params.config.activation, v);  // terminal layer activated
  }
  return x;
}

std::vector<double> deeponet_eval(const DeepONetParams& params, double x0,
                                  std::span<const double> path_values,
                                  std::span<const double> query_times, EvalCounters* counters) {
  if (!std::isfinite(x0)) throw std::invalid_argument("deeponet_eval: x0 must be finite");
  const auto inputs = branch_inputs(params.config, path_values);
  const auto hidden = encode_path(params, inputs);
  if (counters) ++counters->encode;
  const auto branch = branch_forward(params, hidden, x0);
  if (counters) ++counters->branch;
  std::vector<double> out;
  out.reserve(query_times.size());
  for (double t : query_times) {
    const auto trunk = trunk_forward(params, t);
    if (counters) ++counters->trunk;
    double sum = 0.0;
    for (int i = 0; i < params.config.p; ++i) sum += branch[i] * trunk[i];
    out.push_back(sum);
  }
  return out;
}

ParamVars register_params(Tape& tape, const DeepONetParams& params, bool requires_grad) {
  const auto reg = [&](const Tensor& t) {
    Tensor copy = t;
    copy.requires_grad = requires_grad;
    return tape.leaf(std::move(copy));
  };
  ParamVars vars;
  vars.rnn_w_in = reg(params.rnn_w_in);
  vars.rnn_w_rec = reg(params.rnn_w_rec);
  vars.rnn_bias = reg(params.rnn_bias);
  for (std::size_t l = 0; l < params.branch_w.size(); ++l) {
    vars.branch_w.push_back(reg(params.branch_w[l]));
    vars.branch_b.push_back(reg(params.branch_b[l]));
  }
  for (std::size_t l = 0; l < params.trunk_w.size(); ++l) {
    vars.trunk_w.push_back(reg(params.trunk_w[l]));
    vars.trunk_b.push_back(reg(params.trunk_b[l]));
  }
  return vars;
}

Var build_encode(Tape& tape, const ParamVars& vars, const NetConfig& config,
                 std::span<const double> inputs) {
  if (inputs.empty()) throw std::invalid_argument("build_encode: empty input sequence");
  Var h = tape.constant(Tensor::zeros({config.rnn_hidden}));
  for (double u : inputs) {
    Var pre = add(add(scale(vars.rnn_w_in, u), matmul(vars.rnn_w_rec, h)), vars.rnn_bias);
    h = activate(config.activation, pre);
  }
  return h;
}

Var build_branch(Tape& tape, const ParamVars& vars, const NetConfig& config, Var hidden,
                 double x0) {
  Var x = concat(hidden, tape.constant(Tensor::scalar(x0)));
  const std::size_t layers = vars.branch_w.size();
  for (std::size_t l = 0; l < layers; ++l) {
    x = add(matmul(vars.branch_w[l], x), vars.branch_b[l]);
    if (l + 1 < layers) x = activate(config.activation, x);
  }
  return x;
}

Var build_trunk(Tape& tape, const ParamVars& vars, const NetConfig& config, double t) {
  Var x = tape.constant(Tensor::scalar(t));
  for (std::size_t l = 0; l < vars.trunk_w.size(); ++l) {
    x = activate(config.activation, add(matmul(vars.trunk_w[l], x), vars.trunk_b[l]));
  }
  return x;
}

Var build_path_loss(Tape& tape, const ParamVars& vars, const NetConfig& config,
                    std::span<const double> path_values, double x0,
                    std::span<const double> query_times, std::span<const double> targets) {
  if (query_times.size() != targets.size() || query_times.empty()) {
    throw std::invalid_argument("build_path_loss: need matching nonempty queries and targets");
  }
  const auto inputs = branch_inputs(config, path_values);
  Var branch = build_branch(tape, vars, config, build_encode(tape, vars, config, inputs), x0);
  Var errors{};
  for (std::size_t k = 0; k < query_times.size(); ++k) {
    Var pred = dot(branch, build_trunk(tape, vars, config, query_times[k]));
    Var err = sub(pred, tape.constant(Tensor::scalar(targets[k])));
    errors = k == 0 ? err : concat(errors, err);
  }
  return mean_sq(errors);
}

}  // namespace sdeop
