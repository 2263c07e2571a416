#pragma once

#include <cstdint>
#include <vector>

#include "sdeop/models.hpp"
#include "sdeop/paths.hpp"

namespace sdeop {

// Result of one N-particle run: trajectories is N x M row-major
// (trajectories[n * M + k] = particle n at node k), seeds records each
// particle's Brownian stream.
struct ParticleEnsemble {
  TimeGrid grid;
  int n_particles = 0;
  std::vector<double> trajectories;
  std::vector<std::uint64_t> seeds;

  double at(int n, int k) const { return trajectories[static_cast<std::size_t>(n) * grid.M + k]; }
  SolutionPath particle(int n) const;
  std::vector<double> terminal_values() const;
};

// Euler steps of the interacting system with the empirical measure frozen per
// step: every particle's coefficients for step k see the full ensemble state
// at node k, then all particles advance together.  Coefficient evaluations
// across particles are independent, so the parallel run is bit-identical to
// the serial one.
ParticleEnsemble emp_solve(const McKeanVlasovModel& model, const std::vector<double>& x0s,
                           const std::vector<BrownianPath>& paths, int threads = 1);

// Convenience: dataset view of an ensemble (each stored path is one particle
// trajectory, with N recorded).
PathDataset ensemble_dataset(const ParticleEnsemble& ensemble,
                             const std::vector<BrownianPath>& paths);

}  // namespace sdeop
