#include "sdeop/solvers.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "sdeop/errors.hpp"
#include "sdeop/parallel.hpp"

namespace sdeop {

SolutionPath euler_maruyama(const SdeModel& model, double x0, const BrownianPath& path) {
  if (!std::isfinite(x0)) throw std::invalid_argument("euler_maruyama: x0 must be finite");
  const TimeGrid& grid = path.grid;
  SolutionPath sol{grid, std::vector<double>(grid.M), x0};
  double x = x0;
  sol.values[0] = x;
  for (int k = 0; k + 1 < grid.M; ++k) {
    const double t = grid.time(k);
    const double a = model.drift(t, x);
    const double b = model.diffusion(t, x);
    x = x + a * grid.h + b * (path.values[k + 1] - path.values[k]);
    if (!std::isfinite(x)) {
      throw NumericError("euler_maruyama: state not finite after step " + std::to_string(k + 1),
                         k + 1);
    }
    sol.values[k + 1] = x;
  }
  return sol;
}

SolutionPath exact_gbm(double a, double b, double x0, const BrownianPath& path) {
  const TimeGrid& grid = path.grid;
  SolutionPath sol{grid, std::vector<double>(grid.M), x0};
  const double rate = a - 0.5 * b * b;
  for (int k = 0; k < grid.M; ++k) {
    sol.values[k] = x0 * std::exp(rate * grid.time(k) + b * path.values[k]);
  }
  return sol;
}

SolutionPath exact_ou(double a, double b, double x0, const BrownianPath& path) {
  const TimeGrid& grid = path.grid;
  SolutionPath sol{grid, std::vector<double>(grid.M), x0};
  // integral_k = sum_{j<k} e^{a t_j} dB_j accumulated once, reused per node
  double integral = 0.0;
  sol.values[0] = x0;
  for (int k = 1; k < grid.M; ++k) {
    const double t_prev = grid.time(k - 1);
    integral += std::exp(a * t_prev) * (path.values[k] - path.values[k - 1]);
    sol.values[k] = std::exp(-a * grid.time(k)) * (x0 + b * integral);
  }
  return sol;
}

double strong_error(const SolutionPath& reference, const SolutionPath& approx) {
  if (reference.grid != approx.grid) {
    throw std::invalid_argument("strong_error: paths live on different grids");
  }
  double sup = 0.0;
  for (std::size_t k = 0; k < reference.values.size(); ++k) {
    sup = std::max(sup, std::abs(reference.values[k] - approx.values[k]));
  }
  return sup * sup;
}

double strong_error(const std::vector<SolutionPath>& reference,
                    const std::vector<SolutionPath>& approx) {
  if (reference.empty() || reference.size() != approx.size()) {
    throw std::invalid_argument("strong_error: need equal nonzero path counts, got " +
                                std::to_string(reference.size()) + " vs " +
                                std::to_string(approx.size()));
  }
  double total = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) total += strong_error(reference[i], approx[i]);
  return total / static_cast<double>(reference.size());
}

std::vector<SolutionPath> solve_paths(const PathSolver& solver, const std::vector<double>& x0s,
                                      const std::vector<BrownianPath>& paths, int threads) {
  if (x0s.size() != paths.size()) {
    throw std::invalid_argument("solve_paths: x0/path count mismatch");
  }
  std::vector<SolutionPath> out(paths.size());
  parallel_for(paths.size(), threads, [&](std::size_t i) {
    out[i] = solver(x0s[i], paths[i]);
  });
  return out;
}

}  // namespace sdeop
