#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sdeop/time_grid.hpp"

namespace sdeop {

// Discrete Brownian motion on a grid: values[k] = B(t_k), values[0] = 0.
// `seed` records the stream that generated it (0 for hand-built paths).
struct BrownianPath {
  TimeGrid grid;
  std::vector<double> values;
  std::uint64_t seed = 0;
};

// One SDE trajectory on a grid, together with its initial condition.
struct SolutionPath {
  TimeGrid grid;
  std::vector<double> values;
  double x0 = 0.0;
};

// Strictly increasing observation times in [0, T], used when the operator
// only gets to see the driving path at a few instants.
struct SensorSet {
  std::vector<double> times;
};

SensorSet make_sensors(std::vector<double> times);

// Paired (Brownian, solution) trajectories on one shared grid.  For particle
// datasets `emp_particles` records the ensemble size N the trajectories came
// from (0 = plain independent paths).
struct PathDataset {
  TimeGrid grid;
  std::vector<BrownianPath> brownian;
  std::vector<SolutionPath> solutions;
  int emp_particles = 0;

  std::size_t size() const { return brownian.size(); }
  void validate() const;  // shared grid, equal counts, B[0] = 0
};

// Brownian increments: values[k+1] = values[k] + sqrt(h) * xi_k with xi_k the
// k-th normal of the stream seeded by `seed`.
BrownianPath sample_brownian(const TimeGrid& grid, std::uint64_t seed);

// Brownian motion observed only at sensor times.  Joint law is exact: one
// normal draw per strictly positive gap, value step = sqrt(gap) * xi.  A
// leading sensor at t = 0 contributes the value 0 and consumes no draw, so
// sensors covering consecutive nodes of a grid replay the same draws as
// sample_brownian on that grid.
std::vector<double> sample_brownian_at_sensors(const SensorSet& sensors, std::uint64_t seed);

// Batch helpers: path i uses derive_seed(base_seed, i).  Serial and parallel
// versions are bit-identical; `threads` <= 1 means serial.
std::vector<BrownianPath> sample_brownian_batch(const TimeGrid& grid, std::uint64_t base_seed,
                                                std::size_t n, int threads = 1);

// Indices of sensor times inside a grid (relative tolerance 1e-9).  Throws
// std::invalid_argument when a sensor does not land on a node.
std::vector<int> sensor_grid_indices(const SensorSet& sensors, const TimeGrid& grid);

// Values of a full path at the given node indices.
std::vector<double> values_at_indices(std::span<const double> values,
                                      std::span<const int> indices);

}  // namespace sdeop
