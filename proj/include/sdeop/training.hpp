#pragma once

#include <cstdint>
#include <vector>

#include "sdeop/adam.hpp"
#include "sdeop/operator_net.hpp"
#include "sdeop/paths.hpp"

namespace sdeop {

struct TrainConfig {
  double lr = 1e-3;
  long max_epochs = 20000;
  double threshold = 1e-5;  // stop once the epoch loss drops this low
  int batch_size = 0;       // 0 = full batch (the default regime; N is small)
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double clip_norm = 0.0;  // 0 = no gradient clipping
  std::uint64_t seed = 0;  // reserved for stochastic variants; unused today
  int threads = 1;

  void validate() const;
};

enum class StopReason { Threshold, MaxEpochs };

struct TrainReport {
  DeepONetParams params;
  std::vector<double> loss_history;  // one entry per epoch, in order
  StopReason stopped_by = StopReason::MaxEpochs;
  double wall_time_s = 0.0;
  AdamState adam;

  double final_loss() const { return loss_history.back(); }
};

// Mean squared prediction error over every (path, node) pair of the dataset:
//   (1/(N M)) sum_i sum_k (F(x0_i, B_i)(t_k) - X_i(t_k))^2.
// Queries are the grid nodes (t_0 included); in sensor mode the encoder sees
// the sensor-restricted path while the loss still covers all nodes.
double trajectory_loss(const DeepONetParams& params, const PathDataset& dataset);

// Loss and its gradient at the current weights, flattened in tensor order.
// Per-path contributions are computed independently (in parallel when
// threads > 1) and reduced in path order, so the result is bit-identical
// for any thread count.
double loss_and_grad(const DeepONetParams& params, const PathDataset& dataset,
                     std::vector<double>& grad_out, int threads = 1);

// Adam on the trajectory loss until the threshold or the epoch cap.  Per
// epoch: loss + gradient, one optimizer step, history entry; stop once the
// recorded loss is at or below the threshold.  A non-finite loss aborts with
// NumericError carrying the epoch index.  Pass `resume` (weights + optimizer
// state from a checkpoint) to continue a run: resuming after n epochs and
// finishing is identical to one uninterrupted run.
TrainReport train(const PathDataset& dataset, const NetConfig& net_config,
                  const TrainConfig& config, const DeepONetParams* resume = nullptr,
                  const AdamState* resume_adam = nullptr);

// Flat parameter vector in tensor order (the order tensors() yields).
std::vector<double> flatten_params(const DeepONetParams& params);
void unflatten_params(std::span<const double> flat, DeepONetParams& params);

}  // namespace sdeop
