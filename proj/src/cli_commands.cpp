#include "sdeop/cli_commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "sdeop/checkpoint.hpp"
#include "sdeop/dataset_io.hpp"
#include "sdeop/errors.hpp"
#include "sdeop/parallel.hpp"
#include "sdeop/rng.hpp"
#include "sdeop/text_io.hpp"
#include "sdeop/version.hpp"

namespace sdeop {

namespace {

namespace fs = std::filesystem;

std::string prepare_out_dir(const ExperimentConfig& config) {
  std::error_code ec;
  fs::create_directories(config.out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + config.out_dir + ": " + ec.message());
  return config.out_dir;
}

std::string join(const std::string& dir, const char* name) {
  return (fs::path(dir) / name).string();
}

HeaderKv base_header(const ExperimentConfig& config) {
  return {{"base_seed", std::to_string(config.base_seed)},
          {"config_hash", config_hash(config)}};
}

// first n paths of a dataset (training view of a bigger file)
PathDataset take_paths(const PathDataset& full, std::size_t n) {
  PathDataset out;
  out.grid = full.grid;
  out.emp_particles = full.emp_particles;
  const auto count = static_cast<std::ptrdiff_t>(n);
  out.brownian.assign(full.brownian.begin(), full.brownian.begin() + count);
  out.solutions.assign(full.solutions.begin(), full.solutions.begin() + count);
  return out;
}

void check_grids_match(const TimeGrid& a, const TimeGrid& b, const std::string& what) {
  if (a != b) {
    throw ConfigError(what + ": grid mismatch (t0/h/M " + fmt_double(a.t0) + "/" +
                      fmt_double(a.h) + "/" + std::to_string(a.M) + " vs " + fmt_double(b.t0) +
                      "/" + fmt_double(b.h) + "/" + std::to_string(b.M) + ")");
  }
}

std::vector<double> grid_times(const TimeGrid& grid) {
  std::vector<double> times(grid.M);
  for (int k = 0; k < grid.M; ++k) times[k] = grid.time(k);
  return times;
}

}  // namespace

SimulateResult cmd_simulate(const ExperimentConfig& config, int threads) {
  const ResolvedModel model = resolve_model(config);
  const std::string out_dir = prepare_out_dir(config);

  PathDataset dataset;
  dataset.grid = config.grid;
  DatasetMeta meta;
  meta.model = model.descriptor;
  meta.solver = config.data.solver;
  meta.x0_policy = model.x0.to_string();
  meta.base_seed = config.base_seed;
  meta.config_hash = config_hash(config);

  if (model.mckean_vlasov) {
    const std::size_t n = static_cast<std::size_t>(config.data.emp_particles);
    const auto paths = sample_brownian_batch(config.grid, config.base_seed, n, threads);
    std::vector<double> x0s(n);
    for (std::size_t i = 0; i < n; ++i) x0s[i] = model.x0.sample(paths[i].seed);
    const ParticleEnsemble ensemble = emp_solve(model.mv, x0s, paths, threads);
    dataset = ensemble_dataset(ensemble, paths);
  } else {
    const std::size_t n = static_cast<std::size_t>(config.data.n_train);
    const auto paths = sample_brownian_batch(config.grid, config.base_seed, n, threads);
    std::vector<double> x0s(n);
    for (std::size_t i = 0; i < n; ++i) x0s[i] = model.x0.sample(paths[i].seed);
    dataset.brownian = paths;
    dataset.solutions = solve_paths(model.reference, x0s, paths, threads);
  }

  SimulateResult result;
  result.dataset_path = join(out_dir, "dataset.txt");
  result.n_paths = dataset.size();
  write_dataset(result.dataset_path, dataset, meta);
  return result;
}

TrainResult cmd_train(const ExperimentConfig& config, const std::string& dataset_path,
                      int threads, const std::string& resume_from) {
  const DatasetFile file = read_dataset(dataset_path);
  check_grids_match(file.data.grid, config.grid, "train");
  if (file.data.size() < static_cast<std::size_t>(config.data.n_train)) {
    throw ConfigError("train: dataset has " + std::to_string(file.data.size()) +
                      " paths but n_train = " + std::to_string(config.data.n_train));
  }
  const PathDataset training = take_paths(file.data, config.data.n_train);

  TrainConfig train_config = config.train;
  train_config.threads = threads;

  Checkpoint resume;
  const DeepONetParams* resume_params = nullptr;
  const AdamState* resume_adam = nullptr;
  if (!resume_from.empty()) {
    resume = load_checkpoint(resume_from);
    if (!resume.adam) {
      throw ConfigError("train: checkpoint " + resume_from +
                        " carries no optimizer state; cannot resume");
    }
    check_grids_match(resume.meta.grid, config.grid, "train (resume)");
    resume_params = &resume.params;
    resume_adam = &*resume.adam;
  }

  const TrainReport report =
      train(training, config.net, train_config, resume_params, resume_adam);

  const std::string out_dir = prepare_out_dir(config);
  TrainResult result;
  result.checkpoint_path = join(out_dir, "checkpoint.json");
  result.loss_history_path = join(out_dir, "loss_history.txt");
  result.train_time_path = join(out_dir, "train_time.txt");
  result.final_loss = report.final_loss();
  result.epochs = static_cast<long>(report.loss_history.size());
  result.stopped_by = report.stopped_by;
  result.wall_time_s = report.wall_time_s;

  Checkpoint ckpt;
  ckpt.params = report.params;
  ckpt.meta.model = file.meta.model;
  ckpt.meta.solver = file.meta.solver;
  ckpt.meta.x0_policy = file.meta.x0_policy;
  ckpt.meta.grid = config.grid;
  ckpt.meta.config_hash = config_hash(config);
  ckpt.meta.final_loss = result.final_loss;
  ckpt.meta.epochs =
      resume_params ? resume.meta.epochs + result.epochs : result.epochs;
  ckpt.meta.stopped_by =
      report.stopped_by == StopReason::Threshold ? "threshold" : "max_epochs";
  ckpt.meta.base_seed = config.base_seed;
  ckpt.adam = report.adam;
  save_checkpoint(result.checkpoint_path, ckpt);

  {
    std::ofstream out(result.loss_history_path);
    if (!out) throw IoError("cmd_train: cannot open " + result.loss_history_path);
    out << "# sdeop-loss v" << kReportFormatVersion << " tool=" << kToolVersion
        << " epochs=" << report.loss_history.size() << " base_seed=" << config.base_seed
        << " config_hash=" << config_hash(config) << "\n";
    for (std::size_t e = 0; e < report.loss_history.size(); ++e) {
      out << e << ' ' << fmt_double(report.loss_history[e]) << "\n";
    }
    if (!out) throw IoError("cmd_train: write failed for " + result.loss_history_path);
  }
  {
    // wall time lives in its own file so the deterministic artifacts above
    // stay byte-stable across runs
    std::ofstream out(result.train_time_path);
    if (!out) throw IoError("cmd_train: cannot open " + result.train_time_path);
    out << fmt_double(report.wall_time_s) << "\n";
  }
  return result;
}

PredictResult cmd_predict(const ExperimentConfig& config, const std::string& checkpoint_path,
                          const std::string& replay_dataset, std::vector<double> queries,
                          int threads) {
  const Checkpoint ckpt = load_checkpoint(checkpoint_path);
  const ResolvedModel model = resolve_model(config);
  if (!model.mckean_vlasov && model.descriptor != ckpt.meta.model && !ckpt.meta.model.empty()) {
    throw ConfigError("predict: checkpoint was trained on " + ckpt.meta.model +
                      " but the config names " + model.descriptor);
  }
  check_grids_match(ckpt.meta.grid, config.grid, "predict");

  const bool grid_queries = queries.empty();
  if (grid_queries) queries = grid_times(config.grid);
  for (double q : queries) {
    if (!std::isfinite(q)) throw ConfigError("predict: query times must be finite");
  }

  const PathPredictor predictor = net_predictor(ckpt.params);
  const std::string out_dir = prepare_out_dir(config);

  std::vector<BrownianPath> paths;
  std::vector<double> x0s;
  std::vector<const std::vector<double>*> truth;  // per path, nullable
  const X0Policy x0_policy =
      ckpt.meta.x0_policy.empty() ? model.x0 : parse_x0_policy(ckpt.meta.x0_policy);

  DatasetFile replay;
  std::vector<SolutionPath> fresh_truth;
  if (!replay_dataset.empty()) {
    replay = read_dataset(replay_dataset);
    check_grids_match(replay.data.grid, config.grid, "predict (replay)");
    if (replay.data.size() == 0) throw ConfigError("predict: replay dataset has no paths");
    paths = replay.data.brownian;
    for (const auto& sol : replay.data.solutions) {
      x0s.push_back(sol.x0);
      truth.push_back(grid_queries ? &sol.values : nullptr);
    }
  } else {
    if (model.mckean_vlasov) {
      throw ConfigError(
          "predict: fresh-path scoring needs a per-path reference solver; "
          "use mv-sample for interacting models");
    }
    const std::size_t n = static_cast<std::size_t>(config.data.n_eval);
    const std::uint64_t eval_base = config.base_seed + kEvalSeedOffset;
    paths = sample_brownian_batch(config.grid, eval_base, n, threads);
    x0s.resize(n);
    for (std::size_t i = 0; i < n; ++i) x0s[i] = x0_policy.sample(paths[i].seed);
    fresh_truth = solve_paths(model.reference, x0s, paths, threads);
    for (const auto& sol : fresh_truth) truth.push_back(grid_queries ? &sol.values : nullptr);
  }

  const std::size_t n = paths.size();
  std::vector<std::vector<double>> preds(n);
  parallel_for(n, threads, [&](std::size_t i) {
    preds[i] = predictor(x0s[i], paths[i], queries);
  });

  PredictResult result;
  result.n_paths = n;
  result.predictions_path = join(out_dir, "predictions.txt");
  {
    std::ofstream out(result.predictions_path);
    if (!out) throw IoError("cmd_predict: cannot open " + result.predictions_path);
    out << "# sdeop-predictions v" << kReportFormatVersion << " tool=" << kToolVersion
        << " paths=" << n << " queries=" << queries.size()
        << " base_seed=" << config.base_seed << " config_hash=" << config_hash(config) << "\n";
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t q = 0; q < queries.size(); ++q) {
        out << i << ' ' << q << ' ' << fmt_double(queries[q]) << ' '
            << fmt_double(preds[i][q]) << "\n";
      }
    }
    if (!out) throw IoError("cmd_predict: write failed for " + result.predictions_path);
  }

  const bool have_truth = !truth.empty() && truth[0] != nullptr;
  if (have_truth) {
    std::vector<double> mses(n);
    for (std::size_t i = 0; i < n; ++i) mses[i] = path_mse(preds[i], *truth[i]);
    result.mse_path = join(out_dir, "path_mse.txt");
    std::ofstream out(result.mse_path);
    if (!out) throw IoError("cmd_predict: cannot open " + result.mse_path);
    out << "# sdeop-path-mse v" << kReportFormatVersion << " tool=" << kToolVersion
        << " paths=" << n << " base_seed=" << config.base_seed
        << " config_hash=" << config_hash(config) << "\n";
    for (std::size_t i = 0; i < n; ++i) out << i << ' ' << fmt_double(mses[i]) << "\n";
    if (!out) throw IoError("cmd_predict: write failed for " + result.mse_path);
    std::vector<double> sorted = mses;
    std::sort(sorted.begin(), sorted.end());
    result.median_mse = sorted[sorted.size() / 2];
  }
  return result;
}

MultiscaleResult cmd_multiscale(const ExperimentConfig& config,
                                const std::string& checkpoint_path, bool oracle_stub,
                                int threads) {
  const ResolvedModel model = resolve_model(config);
  if (model.mckean_vlasov) {
    throw ConfigError("multiscale: needs a per-path reference solver; interacting models "
                      "have none");
  }

  Checkpoint ckpt;
  PathPredictor predictor;
  X0Policy x0_policy = model.x0;
  if (oracle_stub) {
    predictor = oracle_predictor(model.reference);
  } else {
    if (checkpoint_path.empty()) {
      throw ConfigError("multiscale: need a checkpoint (or the oracle stub)");
    }
    ckpt = load_checkpoint(checkpoint_path);
    check_grids_match(ckpt.meta.grid, config.grid, "multiscale");
    if (!ckpt.meta.model.empty() && ckpt.meta.model != model.descriptor) {
      throw ConfigError("multiscale: checkpoint was trained on " + ckpt.meta.model +
                        " but the config names " + model.descriptor);
    }
    predictor = net_predictor(ckpt.params);
    if (!ckpt.meta.x0_policy.empty()) x0_policy = parse_x0_policy(ckpt.meta.x0_policy);
  }

  const auto rows = multiscale_eval(predictor, model.reference, config.grid,
                                    config.eval.scales, config.data.n_eval,
                                    config.base_seed + kEvalSeedOffset, x0_policy, threads);

  const std::string out_dir = prepare_out_dir(config);
  MultiscaleResult result;
  result.rows = rows;
  result.report_path = join(out_dir, "multiscale.txt");
  HeaderKv kv = base_header(config);
  kv.emplace_back("model", model.descriptor);
  kv.emplace_back("n_paths", std::to_string(config.data.n_eval));
  kv.emplace_back("predictor", oracle_stub ? "oracle" : "net");
  emit_multiscale(result.report_path, rows, kv);
  return result;
}

BenchResult cmd_bench(const ExperimentConfig& config, const std::string& checkpoint_path,
                      const std::string& train_time_path) {
  const ResolvedModel model = resolve_model(config);
  if (!model.mckean_vlasov) {
    throw ConfigError("bench: the timing lattice compares against the particle solver; "
                      "configure an interacting model");
  }

  double t_time = -1.0;
  if (!train_time_path.empty()) {
    std::ifstream in(train_time_path);
    if (!in) throw IoError("bench: cannot open " + train_time_path);
    std::string line;
    std::getline(in, line);
    if (!parse_double(line, t_time) || !(t_time >= 0.0)) {
      throw FormatError("bench: " + train_time_path + " must hold one wall-time value", 1);
    }
  }

  DeepONetParams params;
  if (!checkpoint_path.empty()) {
    params = load_checkpoint(checkpoint_path).params;
  } else {
    params = init_params(config.net);  // timing is weight-agnostic
  }

  const X0Policy x0 = model.x0;
  BenchResult result;
  for (int m : config.bench.node_counts) {
    const TimeGrid grid = make_grid(config.grid.t0, config.grid.h, m);
    for (int n : config.bench.particle_counts) {
      TimingRow row;
      row.method = "emp";
      row.n = n;
      row.m = m;
      row.times = bench_emp(model.mv, n, grid, rng::derive_seed(config.base_seed, m * 131 + n),
                            x0);
      result.rows.push_back(std::move(row));
    }
    const SensorSet sensors = make_sensors({grid.horizon()});
    for (int n : config.bench.particle_counts) {
      TimingRow row;
      row.method = "operator";
      row.n = n;
      row.m = m;
      row.times = bench_operator(params, sensors, n,
                                 rng::derive_seed(config.base_seed, m * 131 + n), x0, t_time);
      result.rows.push_back(std::move(row));
    }
  }

  const std::string out_dir = prepare_out_dir(config);
  result.report_path = join(out_dir, "timing.txt");
  HeaderKv kv = base_header(config);
  kv.emplace_back("model", model.descriptor);
  emit_timing(result.report_path, result.rows, kv);
  return result;
}

MvSampleResult cmd_mv_sample(const ExperimentConfig& config, const std::string& checkpoint_path,
                             const std::string& reference_path, int n_samples,
                             double terminal_time) {
  if (n_samples < 1) throw ConfigError("mv-sample: need at least one sample");
  const Checkpoint ckpt = load_checkpoint(checkpoint_path);
  if (!ckpt.params.config.sensor_mode()) {
    throw ConfigError("mv-sample: checkpoint must be sensor-trained (net.sensor_times) so the "
                      "operator can consume terminal-only Brownian draws");
  }
  const SensorSet sensors = make_sensors(ckpt.params.config.sensor_times);
  const double T = sensors.times.back();
  if (terminal_time > 0.0 &&
      std::abs(terminal_time - T) > 1e-9 * std::max(1.0, std::abs(terminal_time))) {
    throw ConfigError("mv-sample: checkpoint sensors end at t=" + fmt_double(T) +
                      ", requested T=" + fmt_double(terminal_time));
  }

  const X0Policy x0_policy = ckpt.meta.x0_policy.empty()
                                 ? parse_x0_policy(config.data.x0)
                                 : parse_x0_policy(ckpt.meta.x0_policy);

  const std::uint64_t eval_base = config.base_seed + kEvalSeedOffset;
  std::vector<double> samples(n_samples);
  const double query[] = {T};
  for (int i = 0; i < n_samples; ++i) {
    const std::uint64_t seed = rng::derive_seed(eval_base, i);
    const auto values = sample_brownian_at_sensors(sensors, seed);
    const double x0 = x0_policy.sample(seed);
    samples[i] = deeponet_eval(ckpt.params, x0, values, query)[0];
  }

  const auto reference = read_terminal_samples(reference_path);
  const Ecdf sample_ecdf = make_ecdf(samples);
  const Ecdf reference_ecdf = make_ecdf(reference);
  const double ks = ks_distance(sample_ecdf, reference_ecdf);

  const std::string out_dir = prepare_out_dir(config);
  MvSampleResult result;
  result.ks = ks;
  result.n_samples = samples.size();
  result.samples_path = join(out_dir, "samples.txt");
  result.ecdf_path = join(out_dir, "samples_ecdf.txt");
  result.reference_ecdf_path = join(out_dir, "reference_ecdf.txt");
  result.ks_path = join(out_dir, "ks.txt");

  HeaderKv kv = base_header(config);
  kv.emplace_back("model", ckpt.meta.model.empty() ? "unknown" : ckpt.meta.model);
  kv.emplace_back("T", fmt_double(T));
  emit_samples(result.samples_path, samples, kv);
  emit_ecdf(result.ecdf_path, sample_ecdf, kv);
  emit_ecdf(result.reference_ecdf_path, reference_ecdf, kv);
  {
    std::ofstream out(result.ks_path);
    if (!out) throw IoError("mv-sample: cannot open " + result.ks_path);
    out << "# sdeop-ks v" << kReportFormatVersion << " tool=" << kToolVersion;
    for (const auto& [key, value] : kv) out << ' ' << key << '=' << value;
    out << "\n" << fmt_double(ks) << ' ' << samples.size() << ' ' << reference.size() << "\n";
    if (!out) throw IoError("mv-sample: write failed for " + result.ks_path);
  }
  return result;
}

}  // namespace sdeop
