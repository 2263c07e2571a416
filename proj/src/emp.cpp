#include "sdeop/emp.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "sdeop/errors.hpp"
#include "sdeop/parallel.hpp"

namespace sdeop {

SolutionPath ParticleEnsemble::particle(int n) const {
  if (n < 0 || n >= n_particles) {
    throw std::invalid_argument("ParticleEnsemble::particle: index " + std::to_string(n) +
                                " out of range");
  }
  SolutionPath path{grid, {}, at(n, 0)};
  path.values.assign(trajectories.begin() + static_cast<std::size_t>(n) * grid.M,
                     trajectories.begin() + static_cast<std::size_t>(n + 1) * grid.M);
  return path;
}

std::vector<double> ParticleEnsemble::terminal_values() const {
  std::vector<double> out(n_particles);
  for (int n = 0; n < n_particles; ++n) out[n] = at(n, grid.M - 1);
  return out;
}

ParticleEnsemble emp_solve(const McKeanVlasovModel& model, const std::vector<double>& x0s,
                           const std::vector<BrownianPath>& paths, int threads) {
  const std::size_t n = x0s.size();
  if (n == 0) throw std::invalid_argument("emp_solve: empty ensemble");
  if (paths.size() != n) {
    throw std::invalid_argument("emp_solve: x0/path count mismatch: " + std::to_string(n) +
                                " vs " + std::to_string(paths.size()));
  }
  const TimeGrid grid = paths[0].grid;
  for (std::size_t i = 1; i < n; ++i) {
    if (paths[i].grid != grid) {
      throw std::invalid_argument("emp_solve: path " + std::to_string(i) +
                                  " is not on the shared grid");
    }
  }

  ParticleEnsemble ens{grid, static_cast<int>(n),
                       std::vector<double>(n * static_cast<std::size_t>(grid.M)),
                       std::vector<std::uint64_t>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(x0s[i])) {
      throw std::invalid_argument("emp_solve: x0 of particle " + std::to_string(i) +
                                  " is not finite");
    }
    ens.trajectories[i * grid.M] = x0s[i];
    ens.seeds[i] = paths[i].seed;
  }

  // state snapshot frozen for the current step
  std::vector<double> snapshot(n);
  for (int k = 0; k + 1 < grid.M; ++k) {
    const double t = grid.time(k);
    for (std::size_t i = 0; i < n; ++i) snapshot[i] = ens.trajectories[i * grid.M + k];
    parallel_for(n, threads, [&](std::size_t i) {
      const double x = snapshot[i];
      const double a = model.drift(t, x, snapshot);
      const double b = model.diffusion(t, x, snapshot);
      const double next = x + a * grid.h + b * (paths[i].values[k + 1] - paths[i].values[k]);
      if (!std::isfinite(next)) {
        throw NumericError("emp_solve: particle " + std::to_string(i) +
                           " not finite after step " + std::to_string(k + 1),
                           k + 1, static_cast<long>(i));
      }
      ens.trajectories[i * grid.M + k + 1] = next;
    });
  }
  return ens;
}

PathDataset ensemble_dataset(const ParticleEnsemble& ensemble,
                             const std::vector<BrownianPath>& paths) {
  if (static_cast<int>(paths.size()) != ensemble.n_particles) {
    throw std::invalid_argument("ensemble_dataset: path count does not match ensemble");
  }
  PathDataset ds;
  ds.grid = ensemble.grid;
  ds.emp_particles = ensemble.n_particles;
  ds.brownian = paths;
  ds.solutions.reserve(paths.size());
  for (int n = 0; n < ensemble.n_particles; ++n) ds.solutions.push_back(ensemble.particle(n));
  ds.validate();
  return ds;
}

}  // namespace sdeop
