#include "sdeop/models.hpp"

#include <algorithm>
#include <stdexcept>

#include "sdeop/text_io.hpp"

namespace sdeop {

SdeModel gbm_model(double a, double b) {
  return SdeModel{
      [a](double, double x) { return a * x; },
      [b](double, double x) { return b * x; },
      "gbm(a=" + fmt_double(a) + ",b=" + fmt_double(b) + ")",
  };
}

SdeModel ou_model(double a, double b) {
  return SdeModel{
      [a](double, double x) { return -a * x; },
      [b](double, double) { return b; },
      "ou(a=" + fmt_double(a) + ",b=" + fmt_double(b) + ")",
  };
}

SdeModel langevin_model(std::function<double(double x)> grad_log_density,
                        std::string descriptor) {
  if (!grad_log_density) {
    throw std::invalid_argument("langevin_model: grad_log_density must be callable");
  }
  return SdeModel{
      [g = std::move(grad_log_density)](double, double x) { return 0.5 * g(x); },
      [](double, double) { return 1.0; },
      std::move(descriptor),
  };
}

SdeModel langevin_gaussian_model() {
  return langevin_model([](double x) { return -x; }, "langevin_gaussian");
}

double burgers_drift(std::span<const double> particles, double x) {
  if (particles.empty()) {
    throw std::invalid_argument("burgers_drift: empty particle ensemble");
  }
  long count = 0;
  for (double p : particles) {
    if (p <= x) ++count;
  }
  return static_cast<double>(count) / static_cast<double>(particles.size());
}

double burgers_drift_sorted(std::span<const double> sorted_particles, double x) {
  if (sorted_particles.empty()) {
    throw std::invalid_argument("burgers_drift_sorted: empty particle ensemble");
  }
  const auto it = std::upper_bound(sorted_particles.begin(), sorted_particles.end(), x);
  return static_cast<double>(it - sorted_particles.begin()) /
         static_cast<double>(sorted_particles.size());
}

McKeanVlasovModel burgers_model(double sigma) {
  return McKeanVlasovModel{
      [](double, double x, std::span<const double> particles) {
        return burgers_drift(particles, x);
      },
      [sigma](double, double, std::span<const double>) { return sigma; },
      "burgers(sigma=" + fmt_double(sigma) + ")",
  };
}

}  // namespace sdeop
