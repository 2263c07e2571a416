#pragma once

#include <span>
#include <vector>

namespace sdeop {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// First/second moment accumulators over the flattened parameter vector.
// Persisting this alongside the weights makes a resumed run identical to an
// uninterrupted one.
struct AdamState {
  long step = 0;
  std::vector<double> m, v;

  bool empty() const { return m.empty() && v.empty() && step == 0; }
};

// One bias-corrected Adam update, in place:
//   m <- b1 m + (1-b1) g        mhat = m / (1 - b1^t)
//   v <- b2 v + (1-b2) g^2      vhat = v / (1 - b2^t)
//   p <- p - lr mhat / (sqrt(vhat) + eps)
// A default-constructed state is initialized to zeros on first use.
void adam_step(std::span<double> params, std::span<const double> grad, AdamState& state,
               const AdamConfig& config);

}  // namespace sdeop
