#pragma once

// Thin wrapper around OpenMP for the data-parallel loops (path batches,
// particle steps, per-path gradients).  Every parallel kernel in the library
// has a serial twin; results are bit-identical because each iteration writes
// only its own slots and reductions are re-ordered nowhere.

#include <cstddef>
#include <exception>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace sdeop {

inline int hardware_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

// Runs body(i) for i in [0, n).  threads <= 1 runs the plain serial loop.
// An exception thrown by any iteration is rethrown after the loop (one of
// them, when several iterations fail).
template <typename Body>
void parallel_for(std::size_t n, int threads, const Body& body) {
#ifdef _OPENMP
  if (threads > 1) {
    std::exception_ptr error;
#pragma omp parallel for schedule(static) num_threads(threads)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
      try {
        body(static_cast<std::size_t>(i));
      } catch (...) {
#pragma omp critical
        if (!error) error = std::current_exception();
      }
    }
    if (error) std::rethrow_exception(error);
    return;
  }
#endif
  (void)threads;
  for (std::size_t i = 0; i < n; ++i) body(i);
}

}  // namespace sdeop
