#include "sdeop/training.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

#include "sdeop/errors.hpp"
#include "sdeop/parallel.hpp"

namespace sdeop {

namespace {

// Per-path training row: what the encoder sees, the initial condition, and
// the targets over the query nodes.
struct Row {
  std::vector<double> path_values;  // full or sensor-restricted driving path
  double x0 = 0.0;
};

struct Prepared {
  std::vector<Row> rows;
  std::vector<double> queries;  // grid nodes, shared by every path
};

Prepared prepare(const NetConfig& net_config, const PathDataset& dataset) {
  if (dataset.size() == 0) throw std::invalid_argument("training: empty dataset");
  dataset.validate();
  Prepared prep;
  prep.queries.reserve(dataset.grid.M);
  for (int k = 0; k < dataset.grid.M; ++k) prep.queries.push_back(dataset.grid.time(k));

  std::vector<int> sensor_idx;
  if (net_config.sensor_mode()) {
    sensor_idx = sensor_grid_indices(make_sensors(net_config.sensor_times), dataset.grid);
  }
  prep.rows.reserve(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    Row row;
    row.x0 = dataset.solutions[i].x0;
    row.path_values = net_config.sensor_mode()
                          ? values_at_indices(dataset.brownian[i].values, sensor_idx)
                          : dataset.brownian[i].values;
    prep.rows.push_back(std::move(row));
  }
  return prep;
}

}  // namespace

void TrainConfig::validate() const {
  if (!(lr > 0.0) || !std::isfinite(lr)) throw std::invalid_argument("train: lr must be > 0");
  if (max_epochs < 1) throw std::invalid_argument("train: max_epochs must be >= 1");
  if (!(threshold >= 0.0)) throw std::invalid_argument("train: threshold must be >= 0");
  if (batch_size < 0) throw std::invalid_argument("train: batch_size must be >= 0");
  if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0) {
    throw std::invalid_argument("train: betas must lie in [0, 1)");
  }
  if (!(eps > 0.0)) throw std::invalid_argument("train: eps must be > 0");
  if (clip_norm < 0.0) throw std::invalid_argument("train: clip_norm must be >= 0");
  if (threads < 1) throw std::invalid_argument("train: threads must be >= 1");
}

double trajectory_loss(const DeepONetParams& params, const PathDataset& dataset) {
  const Prepared prep = prepare(params.config, dataset);
  const std::size_t n = prep.rows.size();
  const std::size_t m = prep.queries.size();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto pred =
        deeponet_eval(params, prep.rows[i].x0, prep.rows[i].path_values, prep.queries);
    double path_sum = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      const double err = pred[k] - dataset.solutions[i].values[k];
      path_sum += err * err;
    }
    total += path_sum / static_cast<double>(m);
  }
  return total / static_cast<double>(n);
}

namespace {

// Loss + flat gradient over rows [begin, end); the mean is over that range.
// Each path builds its own tape; grads land in per-path slots and are summed
// in path order afterwards, which keeps any thread count bit-identical.
double batch_loss_and_grad(const DeepONetParams& params, const Prepared& prep,
                           const PathDataset& dataset, std::size_t begin, std::size_t end,
                           std::vector<double>& grad_out, std::vector<double>& path_losses,
                           int threads) {
  const std::size_t count = end - begin;
  const std::size_t P = params.param_count();
  grad_out.assign(P, 0.0);
  std::vector<double> rows_grad(count * P);

  parallel_for(count, threads, [&](std::size_t slot) {
    const std::size_t i = begin + slot;
    Tape tape;
    ParamVars vars = register_params(tape, params, true);
    Var loss = build_path_loss(tape, vars, params.config, prep.rows[i].path_values,
                               prep.rows[i].x0, prep.queries, dataset.solutions[i].values);
    tape.backward(loss);
    path_losses[i] = tape.value(loss).data[0];

    double* out = rows_grad.data() + slot * P;
    std::size_t offset = 0;
    const auto copy_grad = [&](Var v) {
      const Tensor& g = tape.grad(v);
      for (double value : g.data) out[offset++] = value;
    };
    copy_grad(vars.rnn_w_in);
    copy_grad(vars.rnn_w_rec);
    copy_grad(vars.rnn_bias);
    for (std::size_t l = 0; l < vars.branch_w.size(); ++l) {
      copy_grad(vars.branch_w[l]);
      copy_grad(vars.branch_b[l]);
    }
    for (std::size_t l = 0; l < vars.trunk_w.size(); ++l) {
      copy_grad(vars.trunk_w[l]);
      copy_grad(vars.trunk_b[l]);
    }
  });

  // fixed-order reduction: path by path, then the 1/count scaling
  for (std::size_t slot = 0; slot < count; ++slot) {
    const double* row = rows_grad.data() + slot * P;
    for (std::size_t j = 0; j < P; ++j) grad_out[j] += row[j];
  }
  const double inv = 1.0 / static_cast<double>(count);
  for (std::size_t j = 0; j < P; ++j) grad_out[j] *= inv;

  // divided (not multiplied by inv) so the value matches trajectory_loss bitwise
  double loss = 0.0;
  for (std::size_t i = begin; i < end; ++i) loss += path_losses[i];
  return loss / static_cast<double>(count);
}

}  // namespace

double loss_and_grad(const DeepONetParams& params, const PathDataset& dataset,
                     std::vector<double>& grad_out, int threads) {
  const Prepared prep = prepare(params.config, dataset);
  std::vector<double> path_losses(prep.rows.size());
  return batch_loss_and_grad(params, prep, dataset, 0, prep.rows.size(), grad_out, path_losses,
                             threads);
}

std::vector<double> flatten_params(const DeepONetParams& params) {
  std::vector<double> flat;
  flat.reserve(params.param_count());
  for (const Tensor* t : params.tensors()) {
    flat.insert(flat.end(), t->data.begin(), t->data.end());
  }
  return flat;
}

void unflatten_params(std::span<const double> flat, DeepONetParams& params) {
  if (flat.size() != params.param_count()) {
    throw std::invalid_argument("unflatten_params: size " + std::to_string(flat.size()) +
                                " does not match parameter count " +
                                std::to_string(params.param_count()));
  }
  std::size_t offset = 0;
  for (Tensor* t : params.tensors()) {
    std::copy(flat.begin() + offset, flat.begin() + offset + t->size(), t->data.begin());
    offset += t->size();
  }
}

TrainReport train(const PathDataset& dataset, const NetConfig& net_config,
                  const TrainConfig& config, const DeepONetParams* resume,
                  const AdamState* resume_adam) {
  config.validate();
  net_config.validate();
  const auto start = std::chrono::steady_clock::now();

  TrainReport report;
  report.params = resume ? *resume : init_params(net_config);
  if (resume) report.params.config.validate();
  if (resume_adam) report.adam = *resume_adam;

  const Prepared prep = prepare(report.params.config, dataset);
  const std::size_t n = prep.rows.size();
  const std::size_t batch =
      config.batch_size == 0 ? n : std::min<std::size_t>(config.batch_size, n);

  const AdamConfig adam_config{config.lr, config.beta1, config.beta2, config.eps};
  std::vector<double> flat = flatten_params(report.params);
  std::vector<double> grad;
  std::vector<double> path_losses(n);

  report.stopped_by = StopReason::MaxEpochs;
  for (long epoch = 0; epoch < config.max_epochs; ++epoch) {
    for (std::size_t begin = 0; begin < n; begin += batch) {
      const std::size_t end = std::min(n, begin + batch);
      batch_loss_and_grad(report.params, prep, dataset, begin, end, grad, path_losses,
                          config.threads);
      if (config.clip_norm > 0.0) {
        double norm_sq = 0.0;
        for (double g : grad) norm_sq += g * g;
        const double norm = std::sqrt(norm_sq);
        if (norm > config.clip_norm) {
          const double scale = config.clip_norm / norm;
          for (double& g : grad) g *= scale;
        }
      }
      adam_step(flat, grad, report.adam, adam_config);
      unflatten_params(flat, report.params);
    }
    // epoch loss: mean over every path's loss recorded during this epoch
    double loss = 0.0;
    for (double l : path_losses) loss += l;
    loss /= static_cast<double>(n);
    if (!std::isfinite(loss)) {
      throw NumericError("training diverged: non-finite loss at epoch " + std::to_string(epoch),
                         epoch);
    }
    report.loss_history.push_back(loss);
    if (loss <= config.threshold) {
      report.stopped_by = StopReason::Threshold;
      break;
    }
  }

  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace sdeop
