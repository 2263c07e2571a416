#include "sdeop/paths.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "sdeop/parallel.hpp"
#include "sdeop/rng.hpp"

namespace sdeop {

SensorSet make_sensors(std::vector<double> times) {
  if (times.empty()) {
    throw std::invalid_argument("make_sensors: need at least one sensor time");
  }
  double prev = -1.0;
  for (double t : times) {
    if (!std::isfinite(t) || t < 0.0) {
      throw std::invalid_argument("make_sensors: sensor times must be finite and >= 0, got " +
                                  std::to_string(t));
    }
    if (t <= prev && prev >= 0.0) {
      throw std::invalid_argument("make_sensors: sensor times must be strictly increasing");
    }
    prev = t;
  }
  return SensorSet{std::move(times)};
}

void PathDataset::validate() const {
  if (brownian.size() != solutions.size()) {
    throw std::invalid_argument("dataset: brownian/solution count mismatch: " +
                                std::to_string(brownian.size()) + " vs " +
                                std::to_string(solutions.size()));
  }
  for (std::size_t i = 0; i < brownian.size(); ++i) {
    if (brownian[i].grid != grid || solutions[i].grid != grid) {
      throw std::invalid_argument("dataset: path " + std::to_string(i) +
                                  " is not on the shared grid");
    }
    if (brownian[i].values.size() != static_cast<std::size_t>(grid.M) ||
        solutions[i].values.size() != static_cast<std::size_t>(grid.M)) {
      throw std::invalid_argument("dataset: path " + std::to_string(i) + " has wrong length");
    }
    if (brownian[i].values[0] != 0.0) {
      throw std::invalid_argument("dataset: Brownian path " + std::to_string(i) +
                                  " does not start at 0");
    }
  }
  if (emp_particles < 0) {
    throw std::invalid_argument("dataset: emp_particles must be >= 0");
  }
}

BrownianPath sample_brownian(const TimeGrid& grid, std::uint64_t seed) {
  rng::GaussianStream stream(seed);
  BrownianPath path{grid, std::vector<double>(grid.M), seed};
  path.values[0] = 0.0;
  const double sqrt_h = std::sqrt(grid.h);
  for (int k = 0; k + 1 < grid.M; ++k) {
    path.values[k + 1] = path.values[k] + sqrt_h * stream.normal_at(k);
  }
  return path;
}

std::vector<double> sample_brownian_at_sensors(const SensorSet& sensors, std::uint64_t seed) {
  rng::GaussianStream stream(seed);
  std::vector<double> values(sensors.times.size());
  double value = 0.0;
  double prev_time = 0.0;
  std::uint64_t draw = 0;
  for (std::size_t j = 0; j < sensors.times.size(); ++j) {
    const double gap = sensors.times[j] - prev_time;
    if (gap > 0.0) {
      value += std::sqrt(gap) * stream.normal_at(draw++);
    }
    values[j] = value;
    prev_time = sensors.times[j];
  }
  return values;
}

std::vector<BrownianPath> sample_brownian_batch(const TimeGrid& grid, std::uint64_t base_seed,
                                                std::size_t n, int threads) {
  std::vector<BrownianPath> paths(n);
  parallel_for(n, threads, [&](std::size_t i) {
    paths[i] = sample_brownian(grid, rng::derive_seed(base_seed, i));
  });
  return paths;
}

std::vector<int> sensor_grid_indices(const SensorSet& sensors, const TimeGrid& grid) {
  std::vector<int> indices;
  indices.reserve(sensors.times.size());
  for (double t : sensors.times) {
    const int k = static_cast<int>(std::lround((t - grid.t0) / grid.h));
    const double tol = 1e-9 * std::max(1.0, std::abs(t));
    if (k < 0 || k >= grid.M || std::abs(grid.time(k) - t) > tol) {
      throw std::invalid_argument("sensor time " + std::to_string(t) +
                                  " does not lie on the grid");
    }
    indices.push_back(k);
  }
  return indices;
}

std::vector<double> values_at_indices(std::span<const double> values,
                                      std::span<const int> indices) {
  std::vector<double> out;
  out.reserve(indices.size());
  for (int k : indices) {
    if (k < 0 || static_cast<std::size_t>(k) >= values.size()) {
      throw std::invalid_argument("values_at_indices: index " + std::to_string(k) +
                                  " out of range");
    }
    out.push_back(values[k]);
  }
  return out;
}

}  // namespace sdeop
