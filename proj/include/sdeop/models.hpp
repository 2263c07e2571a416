#pragma once

#include <functional>
#include <span>
#include <string>

namespace sdeop {

// Scalar SDE  dX = a(t, X) dt + b(t, X) dB  with named coefficients.
// `descriptor` is the canonical "name(k=v,...)" string used in file headers.
struct SdeModel {
  std::function<double(double t, double x)> drift;
  std::function<double(double t, double x)> diffusion;
  std::string descriptor;
};

// Interacting-particle SDE: coefficients see the stepwise-frozen empirical
// ensemble.  They must depend on `particles` only through its values as a
// multiset (permutation invariant), never on the ordering.
struct McKeanVlasovModel {
  std::function<double(double t, double x, std::span<const double> particles)> drift;
  std::function<double(double t, double x, std::span<const double> particles)> diffusion;
  std::string descriptor;
};

// Geometric Brownian motion: dX = a X dt + b X dB.
SdeModel gbm_model(double a, double b);

// Ornstein-Uhlenbeck: dX = -a X dt + b dB.
SdeModel ou_model(double a, double b);

// Overdamped Langevin dynamics for log-density gradient g:
// dX = (1/2) g(X) dt + dB.
SdeModel langevin_model(std::function<double(double x)> grad_log_density,
                        std::string descriptor = "langevin");

// Langevin dynamics whose stationary law is the standard normal (g(x) = -x).
SdeModel langevin_gaussian_model();

// Rank-based drift of the Burgers-type interacting system: the fraction of
// particles at or below x (a particle always counts itself).
double burgers_drift(std::span<const double> particles, double x);

// Same value, O(log N) per query against a pre-sorted copy of the ensemble.
// Kept for cross-checking; complexity benchmarks use the generic counting
// version above.
double burgers_drift_sorted(std::span<const double> sorted_particles, double x);

// Burgers-type system: dX = (1/N) #{m : X_m <= X} dt + sigma dB.
McKeanVlasovModel burgers_model(double sigma);

}  // namespace sdeop
