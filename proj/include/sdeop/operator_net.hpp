#pragma once

// Solution-operator network: learns the map (x0, Brownian path) -> solution
// path.  A recurrent encoder turns the driving path (any length) into a fixed
// vector; the branch MLP consumes that encoding spliced with x0 and ends
// affine; the trunk MLP consumes a query time t and ends activated.  The
// prediction at t is the dot product of the two p-dimensional outputs, so one
// encoded path prices arbitrarily many query times.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sdeop/autograd.hpp"
#include "sdeop/tensor.hpp"

namespace sdeop {

enum class Activation { Tanh, Sigmoid };

// What the recurrent encoder reads at step j.
enum class BranchInput {
  Values,      // the driving path's values B_j themselves
  Increments,  // differences B_j - B_{j-1} (first input = B_0)
};

struct NetConfig {
  int rnn_hidden = 64;
  std::vector<int> branch_layers{128, 128, 64};  // hidden widths..., then p
  std::vector<int> trunk_layers{128, 128, 64};
  int p = 64;  // joint output dimension; must equal both terminal widths
  Activation activation = Activation::Tanh;
  BranchInput branch_input = BranchInput::Values;
  // Empty: the encoder reads the full grid path.  Non-empty: it reads the
  // path restricted to these times (checkpoints carry them so inference
  // feeds the same view the net was trained on).
  std::vector<double> sensor_times;
  std::uint64_t init_seed = 1;

  void validate() const;
  bool sensor_mode() const { return !sensor_times.empty(); }
};

// All weights of one network.  Tensor order (also the flattening order used
// by the optimizer and by checkpoints) is:
//   rnn_w_in {H}, rnn_w_rec {H,H}, rnn_bias {H},
//   branch layer 0 (W, b), branch layer 1 (W, b), ...,
//   trunk layer 0 (W, b), ...
struct DeepONetParams {
  NetConfig config;
  Tensor rnn_w_in;
  Tensor rnn_w_rec;
  Tensor rnn_bias;
  std::vector<Tensor> branch_w, branch_b;
  std::vector<Tensor> trunk_w, trunk_b;

  std::vector<Tensor*> tensors();
  std::vector<const Tensor*> tensors() const;
  std::vector<std::string> tensor_names() const;
  std::size_t param_count() const;
};

// Glorot-uniform weights (bound sqrt(6 / (fan_in + fan_out)), entries drawn
// row-major from a per-tensor stream derive_seed(init_seed, tensor_index)),
// zero biases.
DeepONetParams init_params(const NetConfig& config);

// The encoder input sequence for a span of driving-path values.
std::vector<double> branch_inputs(const NetConfig& config, std::span<const double> values);

// Fast inference path (no tape).  encode_path folds the sequence through the
// recurrent cell (h_0 = 0); branch_forward splices x0 onto the encoding;
// trunk_forward maps one query time.
std::vector<double> encode_path(const DeepONetParams& params, std::span<const double> inputs);
std::vector<double> branch_forward(const DeepONetParams& params, std::span<const double> hidden,
                                   double x0);
std::vector<double> trunk_forward(const DeepONetParams& params, double t);

// Pass counters for asserting the branch-once / trunk-per-query split.
struct EvalCounters {
  long encode = 0;
  long branch = 0;
  long trunk = 0;
};

// Full prediction at each query time.  Encodes and branches exactly once,
// runs the trunk once per query.
std::vector<double> deeponet_eval(const DeepONetParams& params, double x0,
                                  std::span<const double> path_values,
                                  std::span<const double> query_times,
                                  EvalCounters* counters = nullptr);

// --- taped twins (training / gradient checks) ---------------------------
// Same arithmetic as the raw path, expressed in autograd primitives, so
// taped forward values match raw inference bit for bit.

struct ParamVars {
  Var rnn_w_in, rnn_w_rec, rnn_bias;
  std::vector<Var> branch_w, branch_b, trunk_w, trunk_b;
};

ParamVars register_params(Tape& tape, const DeepONetParams& params, bool requires_grad = true);

Var build_encode(Tape& tape, const ParamVars& vars, const NetConfig& config,
                 std::span<const double> inputs);
Var build_branch(Tape& tape, const ParamVars& vars, const NetConfig& config, Var hidden,
                 double x0);
Var build_trunk(Tape& tape, const ParamVars& vars, const NetConfig& config, double t);

// Mean squared prediction error of one path over its query times.
Var build_path_loss(Tape& tape, const ParamVars& vars, const NetConfig& config,
                    std::span<const double> path_values, double x0,
                    std::span<const double> query_times, std::span<const double> targets);

}  // namespace sdeop
