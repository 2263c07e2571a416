#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "sdeop/models.hpp"
#include "sdeop/paths.hpp"

namespace sdeop {

// Maps (x0, driving path) to a solution trajectory on the path's grid.
using PathSolver = std::function<SolutionPath(double x0, const BrownianPath&)>;

// Explicit Euler-Maruyama step along a given Brownian path:
//   X_{k+1} = X_k + a(t_k, X_k) h + b(t_k, X_k) (B_{k+1} - B_k).
// Throws NumericError (with the step index) if the state leaves the finite
// range.
SolutionPath euler_maruyama(const SdeModel& model, double x0, const BrownianPath& path);

// Closed form for dX = aX dt + bX dB:
//   X_k = x0 exp((a - b^2/2) t_k + b B_k).
SolutionPath exact_gbm(double a, double b, double x0, const BrownianPath& path);

// Closed form for dX = -aX dt + b dB, with the stochastic integral evaluated
// by left-point quadrature on the path's own grid:
//   X_k = e^{-a t_k} (x0 + b sum_{j<k} e^{a t_j} (B_{j+1} - B_j)).
SolutionPath exact_ou(double a, double b, double x0, const BrownianPath& path);

// sup_k |ref_k - approx_k|^2 of one path pair on a shared grid; the batch
// overload averages it over paths (the Monte Carlo strong-error estimate).
double strong_error(const SolutionPath& reference, const SolutionPath& approx);
double strong_error(const std::vector<SolutionPath>& reference,
                    const std::vector<SolutionPath>& approx);

// Solves one path per (x0, Brownian) pair.  Serial and parallel runs are
// bit-identical; `threads` <= 1 means serial.
std::vector<SolutionPath> solve_paths(const PathSolver& solver, const std::vector<double>& x0s,
                                      const std::vector<BrownianPath>& paths, int threads = 1);

}  // namespace sdeop
