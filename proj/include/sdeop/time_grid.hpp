#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace sdeop {

// Uniform time grid t_k = t0 + k*h for k = 0..M-1.  Nodes are derived, never
// stored, so a grid can not go inconsistent.
struct TimeGrid {
  double t0 = 0.0;
  double h = 0.0;
  int M = 0;

  double time(int k) const { return t0 + k * h; }
  double horizon() const { return time(M - 1); }

  bool operator==(const TimeGrid&) const = default;
};

inline TimeGrid make_grid(double t0, double h, int M) {
  if (!std::isfinite(t0) || !std::isfinite(h)) {
    throw std::invalid_argument("make_grid: t0 and h must be finite");
  }
  if (h <= 0.0) {
    throw std::invalid_argument("make_grid: h must be positive, got " + std::to_string(h));
  }
  if (M < 2) {
    throw std::invalid_argument("make_grid: need at least 2 nodes, got " + std::to_string(M));
  }
  return TimeGrid{t0, h, M};
}

// Same node count, step scaled by `factor`; the horizon scales with it.
inline TimeGrid rescale_grid(const TimeGrid& g, double factor) {
  if (!std::isfinite(factor) || factor <= 0.0) {
    throw std::invalid_argument("rescale_grid: factor must be positive and finite, got " +
                                std::to_string(factor));
  }
  return make_grid(g.t0, g.h * factor, g.M);
}

}  // namespace sdeop
