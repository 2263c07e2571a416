#include "sdeop/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "sdeop/dataset_io.hpp"
#include "sdeop/errors.hpp"
#include "sdeop/parallel.hpp"
#include "sdeop/rng.hpp"
#include "sdeop/text_io.hpp"
#include "sdeop/version.hpp"

namespace sdeop {

namespace {

// sub-stream tag separating x0 draws from Brownian increments of one path
constexpr std::uint64_t kX0StreamTag = 1001;

double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  return values[values.size() / 2];
}

// median of `reps` runs after `warmup` unrecorded runs
template <typename F>
double time_median(F&& fn, int reps = 5, int warmup = 1) {
  for (int i = 0; i < warmup; ++i) fn();
  std::vector<double> times(reps);
  for (int i = 0; i < reps; ++i) {
    const auto start = std::chrono::steady_clock::now();
    fn();
    times[i] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  return median_of(std::move(times));
}

void write_header(std::ofstream& out, const std::string& kind, const HeaderKv& kv) {
  out << "# sdeop-" << kind << " v" << kReportFormatVersion << " tool=" << kToolVersion;
  for (const auto& [key, value] : kv) out << ' ' << key << '=' << value;
  out << "\n";
}

}  // namespace

double X0Policy::sample(std::uint64_t path_seed) const {
  if (kind == Kind::Fixed) return value;
  return rng::GaussianStream(rng::derive_seed(path_seed, kX0StreamTag)).normal_at(0);
}

std::string X0Policy::to_string() const {
  return kind == Kind::Fixed ? "fixed(" + fmt_double(value) + ")" : "normal(0,1)";
}

X0Policy parse_x0_policy(const std::string& text) {
  if (text == "normal(0,1)" || text == "normal") return X0Policy{X0Policy::Kind::StdNormal, 0.0};
  if (text.rfind("fixed(", 0) == 0 && text.back() == ')') {
    double v = 0.0;
    if (parse_double(std::string_view(text).substr(6, text.size() - 7), v)) {
      return X0Policy{X0Policy::Kind::Fixed, v};
    }
  }
  throw std::invalid_argument("unknown x0 policy '" + text +
                              "' (expected fixed(<value>) or normal(0,1))");
}

double path_mse(std::span<const double> prediction, std::span<const double> reference) {
  if (prediction.size() != reference.size() || prediction.empty()) {
    throw std::invalid_argument("path_mse: need equal nonzero lengths, got " +
                                std::to_string(prediction.size()) + " vs " +
                                std::to_string(reference.size()));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < prediction.size(); ++i) {
    const double err = prediction[i] - reference[i];
    sum += err * err;
  }
  return sum / static_cast<double>(prediction.size());
}

namespace {

// in-place min-max normalization to [0, 1]; throws on a flat input
void normalize_unit(std::vector<double>& values, const char* which) {
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double range = *hi - *lo;
  if (range == 0.0) {
    throw std::invalid_argument(std::string("standardized_mse: ") + which +
                                " is constant; no range to normalize by");
  }
  const double min = *lo;
  for (double& v : values) v = (v - min) / range;
}

}  // namespace

double standardized_mse(std::span<const double> prediction, std::span<const double> reference) {
  if (prediction.size() != reference.size() || prediction.empty()) {
    throw std::invalid_argument("standardized_mse: need equal nonzero lengths, got " +
                                std::to_string(prediction.size()) + " vs " +
                                std::to_string(reference.size()));
  }
  std::vector<double> pred(prediction.begin(), prediction.end());
  std::vector<double> ref(reference.begin(), reference.end());
  normalize_unit(pred, "prediction");
  normalize_unit(ref, "reference");
  return path_mse(pred, ref);
}

PathPredictor net_predictor(const DeepONetParams& params) {
  // captured by value: the predictor owns its weights and may outlive the caller's copy
  return [params](double x0, const BrownianPath& path, std::span<const double> queries) {
    if (params.config.sensor_mode()) {
      const auto idx = sensor_grid_indices(make_sensors(params.config.sensor_times), path.grid);
      return deeponet_eval(params, x0, values_at_indices(path.values, idx), queries);
    }
    return deeponet_eval(params, x0, path.values, queries);
  };
}

PathPredictor oracle_predictor(const PathSolver& solver) {
  return [solver](double x0, const BrownianPath& path, std::span<const double> queries) {
    SolutionPath sol = solver(x0, path);
    if (sol.values.size() != queries.size()) {
      throw std::invalid_argument("oracle_predictor: query times must be the path's grid");
    }
    return sol.values;
  };
}

std::vector<MultiscaleRow> multiscale_eval(const PathPredictor& predictor,
                                           const PathSolver& reference,
                                           const TimeGrid& base_grid,
                                           std::span<const double> scales, int n_paths,
                                           std::uint64_t base_seed, const X0Policy& x0,
                                           int threads) {
  if (scales.empty()) throw std::invalid_argument("multiscale_eval: no scales given");
  if (n_paths < 1) throw std::invalid_argument("multiscale_eval: n_paths must be >= 1");

  std::vector<MultiscaleRow> rows;
  rows.reserve(scales.size());
  for (std::size_t si = 0; si < scales.size(); ++si) {
    const TimeGrid grid = rescale_grid(base_grid, scales[si]);
    std::vector<double> queries(grid.M);
    for (int k = 0; k < grid.M; ++k) queries[k] = grid.time(k);
    const std::uint64_t scale_seed = rng::derive_seed(base_seed, si);

    std::vector<double> errors(n_paths);
    std::vector<char> failed(n_paths, 0);
    parallel_for(static_cast<std::size_t>(n_paths), threads, [&](std::size_t i) {
      const std::uint64_t seed = rng::derive_seed(scale_seed, i);
      const BrownianPath path = sample_brownian(grid, seed);
      const double x0_i = x0.sample(seed);
      const SolutionPath truth = reference(x0_i, path);
      const auto pred = predictor(x0_i, path, queries);
      bool finite = true;
      for (double v : truth.values) finite = finite && std::isfinite(v);
      for (double v : pred) finite = finite && std::isfinite(v);
      if (!finite) {
        failed[i] = 1;  // overflowed path: recorded, not averaged
        return;
      }
      try {
        errors[i] = standardized_mse(pred, truth.values);
      } catch (const std::invalid_argument&) {
        failed[i] = 1;  // degenerate (flat) path: recorded, not averaged
      }
    });

    MultiscaleRow row;
    row.scale = scales[si];
    for (int i = 0; i < n_paths; ++i) {
      if (failed[i]) {
        ++row.n_failed;
        continue;
      }
      ++row.n_paths;
      row.mean += errors[i];
    }
    if (row.n_paths == 0) {
      throw NumericError("multiscale_eval: every path degenerate at scale " +
                         fmt_double(scales[si]));
    }
    row.mean /= row.n_paths;
    double ss = 0.0;
    for (int i = 0; i < n_paths; ++i) {
      if (failed[i]) continue;
      const double d = errors[i] - row.mean;
      ss += d * d;
    }
    row.std_dev = row.n_paths > 1 ? std::sqrt(ss / (row.n_paths - 1)) : 0.0;
    rows.push_back(std::move(row));
  }
  return rows;
}

double Ecdf::operator()(double x) const {
  const auto it = std::upper_bound(sorted.begin(), sorted.end(), x);
  return static_cast<double>(it - sorted.begin()) / static_cast<double>(sorted.size());
}

Ecdf make_ecdf(std::span<const double> samples) {
  if (samples.empty()) throw std::invalid_argument("make_ecdf: no samples");
  for (double v : samples) {
    if (!std::isfinite(v)) throw std::invalid_argument("make_ecdf: non-finite sample");
  }
  Ecdf e;
  e.sorted.assign(samples.begin(), samples.end());
  std::sort(e.sorted.begin(), e.sorted.end());
  return e;
}

double ks_distance(const Ecdf& a, const Ecdf& b) {
  if (a.sorted.empty() || b.sorted.empty()) {
    throw std::invalid_argument("ks_distance: empty distribution");
  }
  // walk the merged support; compare post-jump values at every distinct point
  const double na = static_cast<double>(a.sorted.size());
  const double nb = static_cast<double>(b.sorted.size());
  std::size_t i = 0, j = 0;
  double worst = 0.0;
  while (i < a.sorted.size() || j < b.sorted.size()) {
    double x;
    if (j >= b.sorted.size()) {
      x = a.sorted[i];
    } else if (i >= a.sorted.size()) {
      x = b.sorted[j];
    } else {
      x = std::min(a.sorted[i], b.sorted[j]);
    }
    while (i < a.sorted.size() && a.sorted[i] == x) ++i;
    while (j < b.sorted.size() && b.sorted[j] == x) ++j;
    worst = std::max(worst, std::abs(static_cast<double>(i) / na -
                                     static_cast<double>(j) / nb));
  }
  return worst;
}

TimingTriple bench_emp(const McKeanVlasovModel& model, int n_particles, const TimeGrid& grid,
                       std::uint64_t seed, const X0Policy& x0) {
  if (n_particles < 1) throw std::invalid_argument("bench_emp: need at least one particle");
  TimingTriple t;
  std::vector<BrownianPath> paths;
  t.b_time_s = time_median([&] {
    paths = sample_brownian_batch(grid, seed, static_cast<std::size_t>(n_particles), 1);
  });
  std::vector<double> x0s(n_particles);
  for (int i = 0; i < n_particles; ++i) x0s[i] = x0.sample(paths[i].seed);
  t.o_time_s = time_median([&] { emp_solve(model, x0s, paths, 1); });
  return t;
}

TimingTriple bench_operator(const DeepONetParams& params, const SensorSet& sensors,
                            int n_samples, std::uint64_t seed, const X0Policy& x0,
                            double t_time_s) {
  if (n_samples < 1) throw std::invalid_argument("bench_operator: need at least one sample");
  TimingTriple t;
  t.t_time_s = t_time_s;
  std::vector<std::vector<double>> inputs(n_samples);
  t.b_time_s = time_median([&] {
    for (int i = 0; i < n_samples; ++i) {
      inputs[i] = sample_brownian_at_sensors(sensors, rng::derive_seed(seed, i));
    }
  });
  const double terminal[] = {sensors.times.back()};
  std::vector<double> x0s(n_samples);
  for (int i = 0; i < n_samples; ++i) x0s[i] = x0.sample(rng::derive_seed(seed, i));
  std::vector<double> out(n_samples);
  t.o_time_s = time_median([&] {
    for (int i = 0; i < n_samples; ++i) {
      out[i] = deeponet_eval(params, x0s[i], inputs[i], terminal)[0];
    }
  });
  return t;
}

void emit_multiscale(const std::string& path, std::span<const MultiscaleRow> rows,
                     const HeaderKv& kv) {
  std::ofstream out(path);
  if (!out) throw IoError("emit_multiscale: cannot open " + path);
  write_header(out, "multiscale", kv);
  for (const auto& row : rows) {
    out << fmt_double(row.scale) << ' ' << fmt_double(row.mean) << ' '
        << fmt_double(row.std_dev) << ' ' << row.n_paths;
    if (row.n_failed > 0) out << " failed=" << row.n_failed;
    out << "\n";
  }
  if (!out) throw IoError("emit_multiscale: write failed for " + path);
}

void emit_timing(const std::string& path, std::span<const TimingRow> rows, const HeaderKv& kv) {
  std::ofstream out(path);
  if (!out) throw IoError("emit_timing: cannot open " + path);
  write_header(out, "timing", kv);
  for (const auto& row : rows) {
    out << row.method << ' ' << row.n << ' ' << row.m << ' ' << fmt_double(row.times.b_time_s)
        << ' ' << fmt_double(row.times.o_time_s) << ' ';
    if (row.times.t_time_s < 0.0) {
      out << 'x';
    } else {
      out << fmt_double(row.times.t_time_s);
    }
    out << "\n";
  }
  if (!out) throw IoError("emit_timing: write failed for " + path);
}

void emit_ecdf(const std::string& path, const Ecdf& e, const HeaderKv& kv) {
  std::ofstream out(path);
  if (!out) throw IoError("emit_ecdf: cannot open " + path);
  HeaderKv full = kv;
  full.emplace_back("n", std::to_string(e.sorted.size()));
  write_header(out, "ecdf", full);
  const double n = static_cast<double>(e.sorted.size());
  for (std::size_t i = 0; i < e.sorted.size(); ++i) {
    // one row per distinct value, carrying the post-jump cdf level
    if (i + 1 < e.sorted.size() && e.sorted[i + 1] == e.sorted[i]) continue;
    out << fmt_double(e.sorted[i]) << ' ' << fmt_double(static_cast<double>(i + 1) / n) << "\n";
  }
  if (!out) throw IoError("emit_ecdf: write failed for " + path);
}

void emit_samples(const std::string& path, std::span<const double> samples, const HeaderKv& kv) {
  std::ofstream out(path);
  if (!out) throw IoError("emit_samples: cannot open " + path);
  HeaderKv full = kv;
  full.emplace_back("n", std::to_string(samples.size()));
  write_header(out, "samples", full);
  for (double v : samples) out << fmt_double(v) << "\n";
  if (!out) throw IoError("emit_samples: write failed for " + path);
}

std::vector<double> read_terminal_samples(const std::string& path) {
  {
    std::ifstream probe(path);
    if (!probe) throw IoError("read_terminal_samples: cannot open " + path);
    std::string first;
    std::getline(probe, first);
    if (first.rfind("# sdeop-dataset", 0) == 0) {
      const DatasetFile file = read_dataset(path);
      if (file.data.size() == 0) {
        throw FormatError("read_terminal_samples: dataset " + path + " has no paths");
      }
      std::vector<double> out;
      out.reserve(file.data.size());
      for (const auto& sol : file.data.solutions) out.push_back(sol.values.back());
      return out;
    }
    if (first.rfind("# sdeop-samples", 0) != 0) {
      throw FormatError("read_terminal_samples: " + path +
                        " is neither a samples nor a dataset file", 1);
    }
  }
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);  // header
  std::vector<double> out;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    double v = 0.0;
    if (!parse_double(line, v)) {
      throw FormatError("read_terminal_samples: malformed sample", row);
    }
    out.push_back(v);
  }
  if (out.empty()) throw FormatError("read_terminal_samples: no samples in " + path);
  return out;
}

}  // namespace sdeop
