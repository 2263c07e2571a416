#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sdeop/emp.hpp"
#include "sdeop/operator_net.hpp"
#include "sdeop/paths.hpp"
#include "sdeop/solvers.hpp"

namespace sdeop {

// Evaluation streams never overlap training streams: path i of an evaluation
// uses derive_seed(base_seed + kEvalSeedOffset, i) (and per-scale runs hash
// the scale index in as well).
inline constexpr std::uint64_t kEvalSeedOffset = 1000003;

// Initial-condition convention, recorded in file headers as text.
struct X0Policy {
  enum class Kind { Fixed, StdNormal };
  Kind kind = Kind::Fixed;
  double value = 1.0;  // Fixed only

  // Draw for one path: a sub-stream of the path's seed, so x0 never collides
  // with the Brownian increments of the same path.
  double sample(std::uint64_t path_seed) const;
  std::string to_string() const;
};
X0Policy parse_x0_policy(const std::string& text);

// Plain mean squared error over a shared set of nodes.
double path_mse(std::span<const double> prediction, std::span<const double> reference);

// MSE after min-max normalizing prediction and reference independently to
// [0, 1]; scale- and shift-free, always in [0, 1].  A constant input has no
// range to normalize by -> std::invalid_argument.
double standardized_mse(std::span<const double> prediction, std::span<const double> reference);

// Anything that maps (x0, driving path) to predictions at query times.
using PathPredictor = std::function<std::vector<double>(
    double x0, const BrownianPath& path, std::span<const double> query_times)>;

// Adapters for multiscale_eval.
PathPredictor net_predictor(const DeepONetParams& params);  // full-grid encoder view
PathPredictor oracle_predictor(const PathSolver& solver);   // harness check: truth as predictor

struct MultiscaleRow {
  double scale = 1.0;
  double mean = 0.0;     // mean standardized MSE over evaluated paths
  double std_dev = 0.0;  // sample standard deviation (n-1)
  int n_paths = 0;       // paths that evaluated cleanly
  int n_failed = 0;      // degenerate paths skipped (counted, not averaged)
};

// Horizon-generalization sweep: per scale factor s, rescale the base grid
// (same node count, step s*h), draw n_paths fresh Brownian paths, compare
// predictor against the reference solver via standardized MSE.
std::vector<MultiscaleRow> multiscale_eval(const PathPredictor& predictor,
                                           const PathSolver& reference,
                                           const TimeGrid& base_grid,
                                           std::span<const double> scales, int n_paths,
                                           std::uint64_t base_seed, const X0Policy& x0,
                                           int threads = 1);

// Right-continuous empirical CDF.
struct Ecdf {
  std::vector<double> sorted;
  double operator()(double x) const;
  std::size_t size() const { return sorted.size(); }
};
Ecdf make_ecdf(std::span<const double> samples);

// Kolmogorov-Smirnov distance sup_x |F1(x) - F2(x)|, exact on the merged
// sample support.
double ks_distance(const Ecdf& a, const Ecdf& b);

// --- timing ---------------------------------------------------------------
// All benchmark kernels run single-threaded; each measurement is the median
// of 5 runs after 1 warmup run on a monotonic clock.

struct TimingTriple {
  double b_time_s = 0.0;   // producing the Brownian inputs
  double o_time_s = 0.0;   // producing the outputs
  double t_time_s = -1.0;  // training cost carried over from a report; -1 = n/a
};

struct TimingRow {
  std::string method;  // "emp" | "operator"
  int n = 0;           // particles / samples
  int m = 0;           // grid nodes
  TimingTriple times;
};

// Particle solver cost at ensemble size N on the given grid (full-path
// Brownian inputs, generic quadratic-cost interaction).
TimingTriple bench_emp(const McKeanVlasovModel& model, int n_particles, const TimeGrid& grid,
                       std::uint64_t seed, const X0Policy& x0);

// Amortized operator sampling cost: N sensor-restricted Brownian draws, N
// inferences at the terminal time.  t_time_s is carried through from the
// training run that produced `params` (negative = unknown).
TimingTriple bench_operator(const DeepONetParams& params, const SensorSet& sensors,
                            int n_samples, std::uint64_t seed, const X0Policy& x0,
                            double t_time_s = -1.0);

// --- report emission ------------------------------------------------------
// One '#' header line (kind, tool version, caller key-values), then plain
// rows; doubles shortest-round-trip.

using HeaderKv = std::vector<std::pair<std::string, std::string>>;

void emit_multiscale(const std::string& path, std::span<const MultiscaleRow> rows,
                     const HeaderKv& kv);
void emit_timing(const std::string& path, std::span<const TimingRow> rows, const HeaderKv& kv);
void emit_ecdf(const std::string& path, const Ecdf& e, const HeaderKv& kv);
void emit_samples(const std::string& path, std::span<const double> samples, const HeaderKv& kv);

// Reads terminal samples back: accepts a samples file, or a dataset file
// (terminal value of every stored path).
std::vector<double> read_terminal_samples(const std::string& path);

}  // namespace sdeop
