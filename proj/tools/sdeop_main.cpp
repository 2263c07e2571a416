// Command-line front end.  Parses flags, loads the experiment config, applies
// overrides, dispatches to the command implementations, and maps exceptions
// onto exit codes:
//   0  success
//   1  usage, config, or file-format problems
//   2  filesystem I/O failures
//   3  numerical failures (divergence, overflow)

#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sdeop/cli_commands.hpp"
#include "sdeop/errors.hpp"
#include "sdeop/parallel.hpp"
#include "sdeop/text_io.hpp"
#include "sdeop/version.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool out_dir_set = false;
  bool deterministic = false;
  int threads = 0;  // 0 = all hardware threads
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "experiment config (JSON); defaults when omitted");
  cmd->add_option("--seed", flags.seed, "override the config's base seed")
      ->each([&flags](const std::string&) { flags.seed_set = true; });
  cmd->add_option("--out-dir", flags.out_dir, "override the config's output directory")
      ->each([&flags](const std::string&) { flags.out_dir_set = true; });
  cmd->add_flag("--deterministic", flags.deterministic,
                "single-threaded execution (results are thread-count independent "
                "either way; this pins the schedule too)");
  cmd->add_option("--threads", flags.threads, "worker threads (0 = all cores)")
      ->check(CLI::NonNegativeNumber);
}

sdeop::ExperimentConfig resolve_config(const CommonFlags& flags) {
  sdeop::ExperimentConfig config;
  if (!flags.config_path.empty()) config = sdeop::load_config(flags.config_path);
  if (flags.seed_set) config.base_seed = flags.seed;
  if (flags.out_dir_set) config.out_dir = flags.out_dir;
  config.validate();
  return config;
}

int resolve_threads(const CommonFlags& flags) {
  if (flags.deterministic) return 1;
  if (flags.threads > 0) return flags.threads;
  return sdeop::hardware_threads();
}

const char* stop_name(sdeop::StopReason reason) {
  return reason == sdeop::StopReason::Threshold ? "threshold" : "max_epochs";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sdeop: learn and exercise SDE solution operators"};
  app.set_version_flag("--version", std::string(sdeop::kToolVersion));
  app.require_subcommand(1);

  CommonFlags flags;

  auto* simulate = app.add_subcommand("simulate", "generate a training dataset");
  add_common_flags(simulate, flags);

  auto* train = app.add_subcommand("train", "fit the operator net to a dataset");
  add_common_flags(train, flags);
  std::string dataset_path;
  std::string resume_from;
  train->add_option("--dataset", dataset_path, "dataset to fit (from simulate)")
      ->required();
  train->add_option("--resume", resume_from, "checkpoint to continue from");

  auto* predict = app.add_subcommand("predict", "run a trained net over driving paths");
  add_common_flags(predict, flags);
  std::string checkpoint_path;
  std::string replay_path;
  std::vector<double> queries;
  predict->add_option("--checkpoint", checkpoint_path, "trained net")->required();
  predict->add_option("--replay", replay_path,
                      "dataset whose stored paths to rerun (omit: fresh evaluation paths)");
  predict->add_option("--query", queries,
                      "explicit query times (omit: every grid node, scored when truth exists)");

  auto* multiscale = app.add_subcommand("multiscale", "error table across time-step scales");
  add_common_flags(multiscale, flags);
  std::string ms_checkpoint;
  bool oracle_stub = false;
  multiscale->add_option("--checkpoint", ms_checkpoint, "trained net");
  multiscale->add_flag("--oracle", oracle_stub,
                       "score the reference solver against itself (harness check)");

  auto* bench = app.add_subcommand("bench", "time the particle solver against operator sampling");
  add_common_flags(bench, flags);
  std::string bench_checkpoint;
  std::string train_time_path;
  bench->add_option("--checkpoint", bench_checkpoint, "trained net (omit: fresh weights)");
  bench->add_option("--train-time", train_time_path,
                    "train_time.txt to carry into the operator rows");

  auto* mv_sample = app.add_subcommand("mv-sample",
                                       "sample the interacting system's terminal law");
  add_common_flags(mv_sample, flags);
  std::string mv_checkpoint;
  std::string reference_path;
  int n_samples = 1000;
  double terminal_time = 0.0;
  mv_sample->add_option("--checkpoint", mv_checkpoint, "sensor-trained net")->required();
  mv_sample->add_option("--reference", reference_path,
                        "reference terminal samples (samples file or dataset)")
      ->required();
  mv_sample->add_option("--samples", n_samples, "number of draws")->check(CLI::PositiveNumber);
  mv_sample->add_option("--terminal-time", terminal_time,
                        "sanity check against the checkpoint's last sensor time");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help and --version land here with Success; real usage errors get 1
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const sdeop::ExperimentConfig config = resolve_config(flags);
    const int threads = resolve_threads(flags);

    if (*simulate) {
      const auto result = sdeop::cmd_simulate(config, threads);
      std::cout << "wrote " << result.dataset_path << " (" << result.n_paths << " paths)\n";
    } else if (*train) {
      const auto result = sdeop::cmd_train(config, dataset_path, threads, resume_from);
      std::cout << "trained " << result.epochs << " epochs, final loss "
                << sdeop::fmt_double(result.final_loss) << " (" << stop_name(result.stopped_by)
                << ", " << sdeop::fmt_double(result.wall_time_s) << " s)\n"
                << "wrote " << result.checkpoint_path << "\n"
                << "wrote " << result.loss_history_path << "\n"
                << "wrote " << result.train_time_path << "\n";
    } else if (*predict) {
      const auto result =
          sdeop::cmd_predict(config, checkpoint_path, replay_path, queries, threads);
      std::cout << "wrote " << result.predictions_path << " (" << result.n_paths << " paths)\n";
      if (!result.mse_path.empty()) {
        std::cout << "wrote " << result.mse_path << " (median mse "
                  << sdeop::fmt_double(result.median_mse) << ")\n";
      }
    } else if (*multiscale) {
      const auto result = sdeop::cmd_multiscale(config, ms_checkpoint, oracle_stub, threads);
      std::cout << "wrote " << result.report_path << "\n";
      for (const auto& row : result.rows) {
        std::cout << "scale " << sdeop::fmt_double(row.scale) << ": mean "
                  << sdeop::fmt_double(row.mean) << " std " << sdeop::fmt_double(row.std_dev)
                  << " (" << row.n_paths << " paths";
        if (row.n_failed > 0) std::cout << ", " << row.n_failed << " failed";
        std::cout << ")\n";
      }
    } else if (*bench) {
      const auto result = sdeop::cmd_bench(config, bench_checkpoint, train_time_path);
      std::cout << "wrote " << result.report_path << " (" << result.rows.size() << " rows)\n";
    } else if (*mv_sample) {
      const auto result = sdeop::cmd_mv_sample(config, mv_checkpoint, reference_path, n_samples,
                                               terminal_time);
      std::cout << "wrote " << result.samples_path << " (" << result.n_samples << " samples)\n"
                << "wrote " << result.ecdf_path << "\n"
                << "wrote " << result.reference_ecdf_path << "\n"
                << "ks distance " << sdeop::fmt_double(result.ks) << " -> " << result.ks_path
                << "\n";
    }
    return 0;
  } catch (const sdeop::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 2;
  } catch (const sdeop::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const sdeop::FormatError& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return 1;
  } catch (const sdeop::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
