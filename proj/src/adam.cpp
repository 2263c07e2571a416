#include "sdeop/adam.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace sdeop {

void adam_step(std::span<double> params, std::span<const double> grad, AdamState& state,
               const AdamConfig& config) {
  const std::size_t n = params.size();
  if (grad.size() != n) {
    throw std::invalid_argument("adam_step: gradient size " + std::to_string(grad.size()) +
                                " does not match parameter size " + std::to_string(n));
  }
  if (state.empty()) {
    state.m.assign(n, 0.0);
    state.v.assign(n, 0.0);
  } else if (state.m.size() != n || state.v.size() != n) {
    throw std::invalid_argument("adam_step: optimizer state size " +
                                std::to_string(state.m.size()) +
                                " does not match parameter size " + std::to_string(n));
  }

  const long t = ++state.step;
  const double corr1 = 1.0 - std::pow(config.beta1, static_cast<double>(t));
  const double corr2 = 1.0 - std::pow(config.beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < n; ++i) {
    const double g = grad[i];
    state.m[i] = config.beta1 * state.m[i] + (1.0 - config.beta1) * g;
    state.v[i] = config.beta2 * state.v[i] + (1.0 - config.beta2) * g * g;
    const double mhat = state.m[i] / corr1;
    const double vhat = state.v[i] / corr2;
    params[i] -= config.lr * mhat / (std::sqrt(vhat) + config.eps);
  }
}

}  // namespace sdeop
