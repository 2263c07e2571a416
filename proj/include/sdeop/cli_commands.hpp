#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sdeop/evaluation.hpp"
#include "sdeop/experiment_config.hpp"
#include "sdeop/training.hpp"

namespace sdeop {

// Command implementations behind the CLI.  Each takes a fully resolved
// config (overrides already applied), writes its artifacts under `out_dir`
// with fixed names, and returns what it wrote plus headline numbers.  All
// validation failures surface as the library's exception types; the CLI
// front end maps them onto exit codes.

struct SimulateResult {
  std::string dataset_path;
  std::size_t n_paths = 0;
};

// Training data: n_train solved paths for a plain SDE, or one full particle
// ensemble (every trajectory stored) for an interacting model.
SimulateResult cmd_simulate(const ExperimentConfig& config, int threads);

struct TrainResult {
  std::string checkpoint_path;
  std::string loss_history_path;
  std::string train_time_path;
  double final_loss = 0.0;
  long epochs = 0;
  StopReason stopped_by = StopReason::MaxEpochs;
  double wall_time_s = 0.0;
};

// Fits the operator net to the first n_train paths of the dataset.  Pass a
// checkpoint path in `resume_from` to continue that run (weights + optimizer
// state), which matches an uninterrupted run of the combined length.
TrainResult cmd_train(const ExperimentConfig& config, const std::string& dataset_path,
                      int threads, const std::string& resume_from = "");

struct PredictResult {
  std::string predictions_path;
  std::string mse_path;  // empty when no per-path truth is available
  std::size_t n_paths = 0;
  double median_mse = -1.0;  // -1 when mse_path is empty
};

// Predictions at the grid nodes (or explicit query times).  `replay_dataset`
// non-empty: rerun the stored Brownian paths of that dataset (fit check).
// Empty: draw n_eval fresh paths from the evaluation stream and score
// against the config's reference solver.
PredictResult cmd_predict(const ExperimentConfig& config, const std::string& checkpoint_path,
                          const std::string& replay_dataset, std::vector<double> queries,
                          int threads);

struct MultiscaleResult {
  std::string report_path;
  std::vector<MultiscaleRow> rows;
};

// Horizon-generalization table over config.eval.scales with n_eval fresh
// paths per scale.  `oracle_stub` replaces the net by the reference solver
// itself (all-zero errors; validates the harness end to end).
MultiscaleResult cmd_multiscale(const ExperimentConfig& config,
                                const std::string& checkpoint_path, bool oracle_stub,
                                int threads);

struct BenchResult {
  std::string report_path;
  std::vector<TimingRow> rows;
};

// Timing lattice: particle solver vs operator sampling across the config's
// (N, M) combinations.  Single-threaded kernels by design.  `checkpoint_path`
// (optional) supplies trained weights; `train_time_path` (optional) carries
// the training cost into the operator rows.
BenchResult cmd_bench(const ExperimentConfig& config, const std::string& checkpoint_path,
                      const std::string& train_time_path);

struct MvSampleResult {
  std::string samples_path;
  std::string ecdf_path;
  std::string reference_ecdf_path;
  std::string ks_path;
  double ks = 0.0;
  std::size_t n_samples = 0;
};

// Amortized sampling of the interacting system's terminal law: n fresh
// (x0, sensor-restricted B) draws, one operator inference each, ECDFs and
// the KS distance against a reference sample file (samples or dataset).
MvSampleResult cmd_mv_sample(const ExperimentConfig& config, const std::string& checkpoint_path,
                             const std::string& reference_path, int n_samples,
                             double terminal_time);

}  // namespace sdeop
