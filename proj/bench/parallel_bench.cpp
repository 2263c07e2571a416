// Serial vs OpenMP timing for the library's data-parallel kernels.  Every
// parallel kernel has a serial twin (threads = 1) that is required to produce
// bit-identical results; this target measures the speedup and verifies that
// equality on realistic sizes.
//
// Usage: parallel_bench [threads]   (default: all hardware threads)

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "sdeop/emp.hpp"
#include "sdeop/models.hpp"
#include "sdeop/parallel.hpp"
#include "sdeop/paths.hpp"
#include "sdeop/solvers.hpp"
#include "sdeop/training.hpp"

namespace {

using Clock = std::chrono::steady_clock;

template <typename Fn>
double time_best_of_3(const Fn& fn) {
  double best = 1e300;
  for (int rep = 0; rep < 3; ++rep) {
    const auto start = Clock::now();
    fn();
    const std::chrono::duration<double> elapsed = Clock::now() - start;
    if (elapsed.count() < best) best = elapsed.count();
  }
  return best;
}

void report(const std::string& name, double serial_s, double parallel_s, bool identical) {
  std::cout << name << ": serial " << serial_s << " s, parallel " << parallel_s << " s, speedup "
            << serial_s / parallel_s << "x, bit-identical: " << (identical ? "yes" : "NO")
            << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  const int threads = argc > 1 ? std::atoi(argv[1]) : sdeop::hardware_threads();
  std::cout << "comparing serial (threads=1) against threads=" << threads << "\n";

  bool all_identical = true;

  {
    const sdeop::TimeGrid grid = sdeop::make_grid(0.0, 0.005, 201);
    const std::size_t n = 2000;
    std::vector<sdeop::BrownianPath> serial_out, parallel_out;
    const double ts = time_best_of_3(
        [&] { serial_out = sdeop::sample_brownian_batch(grid, 7, n, 1); });
    const double tp = time_best_of_3(
        [&] { parallel_out = sdeop::sample_brownian_batch(grid, 7, n, threads); });
    bool same = serial_out.size() == parallel_out.size();
    for (std::size_t i = 0; same && i < n; ++i) {
      same = serial_out[i].values == parallel_out[i].values;
    }
    all_identical = all_identical && same;
    report("brownian batch (2000 paths x 201 nodes)", ts, tp, same);
  }

  {
    const sdeop::TimeGrid grid = sdeop::make_grid(0.0, 0.01, 101);
    const int n = 1000;
    const sdeop::McKeanVlasovModel model = sdeop::burgers_model(1.0);
    const auto paths = sdeop::sample_brownian_batch(grid, 11, n, threads);
    std::vector<double> x0s(n);
    for (int i = 0; i < n; ++i) x0s[i] = 0.1 * (i % 10);
    sdeop::ParticleEnsemble serial_out, parallel_out;
    const double ts = time_best_of_3([&] { serial_out = sdeop::emp_solve(model, x0s, paths, 1); });
    const double tp =
        time_best_of_3([&] { parallel_out = sdeop::emp_solve(model, x0s, paths, threads); });
    const bool same = serial_out.trajectories == parallel_out.trajectories;
    all_identical = all_identical && same;
    report("particle solver (1000 particles x 101 nodes)", ts, tp, same);
  }

  {
    const sdeop::TimeGrid grid = sdeop::make_grid(0.0, 0.02, 51);
    const int n = 16;
    sdeop::NetConfig net;
    net.rnn_hidden = 32;
    net.branch_layers = {64, 64, 32};
    net.trunk_layers = {64, 64, 32};
    net.p = 32;
    const sdeop::DeepONetParams params = sdeop::init_params(net);
    const auto paths = sdeop::sample_brownian_batch(grid, 13, n, threads);
    std::vector<double> x0s(n, 1.0);
    sdeop::PathDataset dataset;
    dataset.grid = grid;
    dataset.brownian = paths;
    dataset.solutions = sdeop::solve_paths(
        [&](double x0, const sdeop::BrownianPath& path) {
          return sdeop::exact_ou(1.0, 1.0, x0, path);
        },
        x0s, paths, threads);
    std::vector<double> serial_grad, parallel_grad;
    double serial_loss = 0.0, parallel_loss = 0.0;
    const double ts = time_best_of_3(
        [&] { serial_loss = sdeop::loss_and_grad(params, dataset, serial_grad, 1); });
    const double tp = time_best_of_3(
        [&] { parallel_loss = sdeop::loss_and_grad(params, dataset, parallel_grad, threads); });
    const bool same = serial_loss == parallel_loss && serial_grad == parallel_grad;
    all_identical = all_identical && same;
    report("loss gradient (16 paths x 51 nodes)", ts, tp, same);
  }

  if (!all_identical) {
    std::cerr << "serial/parallel mismatch detected\n";
    return 1;
  }
  return 0;
}
