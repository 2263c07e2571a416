// Error metrics, initial-condition policies, the horizon-generalization
// sweep, empirical CDFs, and benchmark/report plumbing.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "sdeop/dataset_io.hpp"
#include "sdeop/errors.hpp"
#include "sdeop/evaluation.hpp"
#include "sdeop/models.hpp"
#include "sdeop/paths.hpp"
#include "sdeop/rng.hpp"
#include "sdeop/solvers.hpp"

using namespace sdeop;

namespace {

std::string temp_file(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

NetConfig tiny_config() {
  NetConfig config;
  config.rnn_hidden = 4;
  config.branch_layers = {6, 4};
  config.trunk_layers = {6, 4};
  config.p = 4;
  config.init_seed = 9;
  return config;
}

}  // namespace

TEST_CASE("fixed initial-condition policy always returns its value") {
  X0Policy policy;  // defaults to Fixed 1.0
  CHECK(policy.sample(1) == 1.0);
  CHECK(policy.sample(999) == 1.0);
  CHECK(policy.to_string() == "fixed(1)");

  const X0Policy half = parse_x0_policy("fixed(0.5)");
  CHECK(half.kind == X0Policy::Kind::Fixed);
  CHECK(half.sample(3) == 0.5);
  CHECK(half.to_string() == "fixed(0.5)");
}

TEST_CASE("random initial conditions are reproducible and standard normal") {
  const X0Policy policy = parse_x0_policy("normal(0,1)");
  CHECK(policy.kind == X0Policy::Kind::StdNormal);
  CHECK(policy.to_string() == "normal(0,1)");
  CHECK(parse_x0_policy("normal").kind == X0Policy::Kind::StdNormal);

  CHECK(policy.sample(7) == policy.sample(7));
  CHECK(policy.sample(7) != policy.sample(8));

  const int n = 10000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = policy.sample(rng::derive_seed(1, i));
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n;
  CHECK(std::abs(mean) < 3.0 / std::sqrt(static_cast<double>(n)));
  CHECK(sq / n - mean * mean == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("the initial condition never reuses the path's own Brownian draws") {
  // the x0 draw comes from a sub-stream, so even the first increments of the
  // path seeded identically stay unrelated
  const X0Policy policy = parse_x0_policy("normal");
  const TimeGrid g = make_grid(0.0, 0.01, 4);
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    const BrownianPath p = sample_brownian(g, seed);
    const double x0 = policy.sample(seed);
    for (int k = 1; k < g.M; ++k) {
      CHECK(x0 != p.values[k] - p.values[k - 1]);
    }
  }
}

TEST_CASE("x0 policy parser rejects malformed text") {
  CHECK_THROWS_AS(parse_x0_policy("uniform(0,1)"), std::invalid_argument);
  CHECK_THROWS_AS(parse_x0_policy("fixed()"), std::invalid_argument);
  CHECK_THROWS_AS(parse_x0_policy("fixed(abc)"), std::invalid_argument);
  CHECK_THROWS_AS(parse_x0_policy(""), std::invalid_argument);
}

TEST_CASE("path_mse on hand values") {
  const std::vector<double> a{1.0, 2.0, 3.0};
  const std::vector<double> b{0.0, 4.0, 1.0};
  CHECK(path_mse(a, b) == 3.0);  // (1 + 4 + 4) / 3
  CHECK(path_mse(a, a) == 0.0);
  CHECK_THROWS_AS(path_mse(a, std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("standardized MSE on a sign flip, by hand") {
  // truth {0,1,3} -> normalized {0, 1/3, 1}; prediction -truth -> {1, 2/3, 0};
  // squared gaps {1, 1/9, 1} -> mean 19/27
  const std::vector<double> truth{0.0, 1.0, 3.0};
  const std::vector<double> flipped{0.0, -1.0, -3.0};
  CHECK(standardized_mse(flipped, truth) == doctest::Approx(19.0 / 27.0).epsilon(1e-15));
}

TEST_CASE("standardized MSE ignores affine rescalings of either argument") {
  const TimeGrid g = make_grid(0.0, 0.01, 31);
  const BrownianPath p = sample_brownian(g, 12);
  const SolutionPath sol = exact_ou(1.0, 1.0, 1.0, p);
  std::vector<double> pred = sol.values;
  for (double& v : pred) v = 5.0 * v + 3.0;  // positive affine map
  CHECK(standardized_mse(pred, sol.values) == doctest::Approx(0.0).epsilon(1e-20));

  // shape differences do register
  std::vector<double> other = sol.values;
  for (std::size_t k = 0; k < other.size(); ++k) other[k] += 0.3 * std::sin(0.5 * k);
  const double mse = standardized_mse(other, sol.values);
  CHECK(mse > 0.0);
  CHECK(mse <= 1.0);
}

TEST_CASE("standardized MSE rejects constant inputs") {
  const std::vector<double> flat{2.0, 2.0, 2.0};
  const std::vector<double> varying{1.0, 2.0, 3.0};
  CHECK_THROWS_AS(standardized_mse(flat, varying), std::invalid_argument);
  CHECK_THROWS_AS(standardized_mse(varying, flat), std::invalid_argument);
}

TEST_CASE("net predictor equals direct evaluation, with the sensor view applied") {
  const TimeGrid g = make_grid(0.0, 0.05, 6);
  const BrownianPath p = sample_brownian(g, 33);
  const std::vector<double> queries{0.0, 0.1, 0.25};

  const DeepONetParams full = init_params(tiny_config());
  const auto pred_full = net_predictor(full)(0.5, p, queries);
  CHECK(pred_full == deeponet_eval(full, 0.5, p.values, queries));

  NetConfig sensor_config = tiny_config();
  sensor_config.sensor_times = {0.1, 0.25};
  const DeepONetParams restricted = init_params(sensor_config);
  const auto idx = sensor_grid_indices(make_sensors(sensor_config.sensor_times), g);
  const auto pred_restricted = net_predictor(restricted)(0.5, p, queries);
  CHECK(pred_restricted ==
        deeponet_eval(restricted, 0.5, values_at_indices(p.values, idx), queries));
}

TEST_CASE("oracle predictor reproduces the reference with zero error at every scale") {
  const PathSolver reference = [](double x0, const BrownianPath& p) {
    return exact_ou(1.0, 1.0, x0, p);
  };
  const TimeGrid base = make_grid(0.0, 0.01, 31);
  const std::vector<double> scales{0.001, 0.01, 0.1, 1.0, 10.0, 100.0, 1000.0};
  const auto rows = multiscale_eval(oracle_predictor(reference), reference, base, scales, 20,
                                    42, X0Policy{});
  REQUIRE(rows.size() == scales.size());
  for (std::size_t si = 0; si < rows.size(); ++si) {
    CHECK(rows[si].scale == scales[si]);
    CHECK(rows[si].mean == 0.0);  // identical curves normalize identically
    CHECK(rows[si].std_dev == 0.0);
    CHECK(rows[si].n_paths == 20);
    CHECK(rows[si].n_failed == 0);
  }
}

TEST_CASE("multiscale sweep is deterministic and bounded") {
  const PathSolver reference = [](double x0, const BrownianPath& p) {
    return exact_ou(1.0, 1.0, x0, p);
  };
  const DeepONetParams params = init_params(tiny_config());
  const TimeGrid base = make_grid(0.0, 0.05, 6);
  const std::vector<double> scales{0.1, 1.0, 10.0};

  const auto rows = multiscale_eval(net_predictor(params), reference, base, scales, 10, 7,
                                    X0Policy{});
  const auto again = multiscale_eval(net_predictor(params), reference, base, scales, 10, 7,
                                     X0Policy{});
  REQUIRE(rows.size() == 3);
  for (std::size_t si = 0; si < 3; ++si) {
    CHECK(rows[si].mean == again[si].mean);
    CHECK(rows[si].std_dev == again[si].std_dev);
    CHECK(rows[si].mean >= 0.0);
    CHECK(rows[si].mean <= 1.0);
    CHECK(rows[si].std_dev >= 0.0);
    CHECK(rows[si].n_paths + rows[si].n_failed == 10);
  }

  // different evaluation seeds draw different paths
  const auto other = multiscale_eval(net_predictor(params), reference, base, scales, 10, 8,
                                     X0Policy{});
  CHECK(rows[1].mean != other[1].mean);
}

TEST_CASE("multiscale sweep counts degenerate paths instead of averaging them") {
  const PathSolver reference = [](double x0, const BrownianPath& p) {
    return exact_ou(1.0, 1.0, x0, p);
  };
  const TimeGrid base = make_grid(0.0, 0.05, 6);
  int calls = 0;
  const PathPredictor flaky = [&](double, const BrownianPath& p,
                                  std::span<const double> queries) {
    ++calls;
    std::vector<double> out(queries.size(), 0.5);
    if (calls % 2 == 0) out[0] = std::nan("");  // every second path degenerates
    else out[1] = 0.6;                          // keep the healthy ones non-constant
    return out;
  };
  const auto rows = multiscale_eval(flaky, reference, base, std::vector<double>{1.0}, 6, 7,
                                    X0Policy{});
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].n_failed == 3);
  CHECK(rows[0].n_paths == 3);

  const PathPredictor broken = [](double, const BrownianPath&,
                                  std::span<const double> queries) {
    return std::vector<double>(queries.size(), std::nan(""));
  };
  CHECK_THROWS_AS(multiscale_eval(broken, reference, base, std::vector<double>{1.0}, 4, 7,
                                  X0Policy{}),
                  NumericError);
}

TEST_CASE("empirical CDF is right-continuous with jumps at the samples") {
  const Ecdf e = make_ecdf(std::vector<double>{2.0, 1.0, 3.0});  // sorting is internal
  CHECK(e(0.5) == 0.0);
  CHECK(e(1.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(e(1.5) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(e(2.999) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(e(3.0) == 1.0);
  CHECK(e(99.0) == 1.0);
  CHECK(e.size() == 3);
  CHECK_THROWS_AS(make_ecdf(std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("KS distance on hand samples") {
  const Ecdf a = make_ecdf(std::vector<double>{1.0, 2.0, 3.0});
  const Ecdf b = make_ecdf(std::vector<double>{1.0, 2.0, 4.0});
  // CDFs agree except on [3, 4), where they differ by exactly 1/3
  CHECK(ks_distance(a, b) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(ks_distance(a, a) == 0.0);
  CHECK(ks_distance(b, a) == ks_distance(a, b));  // symmetry
}

TEST_CASE("KS distance satisfies the metric axioms on random ECDFs") {
  auto sample_ecdf = [](std::uint64_t tag, double shift) {
    std::vector<double> xs(200);
    const rng::GaussianStream s(rng::derive_seed(41, tag));
    for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = s.normal_at(i) + shift;
    return make_ecdf(xs);
  };
  const Ecdf e1 = sample_ecdf(1, 0.0);
  const Ecdf e2 = sample_ecdf(2, 0.3);
  const Ecdf e3 = sample_ecdf(3, -0.2);

  CHECK(ks_distance(e1, e2) > 0.0);
  CHECK(ks_distance(e1, e2) <= 1.0);
  CHECK(ks_distance(e1, e2) == ks_distance(e2, e1));
  CHECK(ks_distance(e1, e3) <= ks_distance(e1, e2) + ks_distance(e2, e3) + 1e-15);
}

TEST_CASE("two large same-law samples sit within the concentration band") {
  // two independent 10^4 draws from N(0,1): the KS distance concentrates
  // around sqrt(log(2/delta)/n); 0.03 fails with probability well under 1e-6
  const int n = 10000;
  std::vector<double> xs(n), ys(n);
  const rng::GaussianStream sx(rng::derive_seed(77, 0));
  const rng::GaussianStream sy(rng::derive_seed(77, 1));
  for (int i = 0; i < n; ++i) {
    xs[i] = sx.normal_at(i);
    ys[i] = sy.normal_at(i);
  }
  CHECK(ks_distance(make_ecdf(xs), make_ecdf(ys)) <= 0.03);
}

TEST_CASE("particle benchmark reports positive timings") {
  const McKeanVlasovModel model = burgers_model(1.0);
  const TimeGrid g = make_grid(0.0, 0.01, 11);
  const TimingTriple t = bench_emp(model, 50, g, 5, X0Policy{});
  CHECK(t.b_time_s > 0.0);
  CHECK(t.o_time_s > 0.0);
  CHECK(t.t_time_s == -1.0);  // no training attached to a particle run
}

TEST_CASE("operator benchmark reports positive timings and carries training cost") {
  NetConfig config = tiny_config();
  config.sensor_times = {0.3};
  const DeepONetParams params = init_params(config);
  const SensorSet sensors = make_sensors(config.sensor_times);
  const TimingTriple t = bench_operator(params, sensors, 50, 5, X0Policy{}, 12.5);
  CHECK(t.b_time_s > 0.0);
  CHECK(t.o_time_s > 0.0);
  CHECK(t.t_time_s == 12.5);
  CHECK(bench_operator(params, sensors, 10, 5, X0Policy{}).t_time_s == -1.0);
}

TEST_CASE("sample emission round-trips through the terminal-sample reader") {
  const std::string path = temp_file("sdeop_test_samples.txt");
  const std::vector<double> samples{0.25, -1.5, 3.0, 0.1, -0.0625};
  emit_samples(path, samples, {{"model", "burgers(sigma=1)"}});
  CHECK(read_terminal_samples(path) == samples);
  std::remove(path.c_str());
}

TEST_CASE("the terminal-sample reader also accepts a dataset file") {
  const std::string path = temp_file("sdeop_test_samples_dataset.txt");
  const TimeGrid g = make_grid(0.0, 0.01, 5);
  PathDataset data;
  data.grid = g;
  for (int i = 0; i < 3; ++i) {
    BrownianPath b = sample_brownian(g, rng::derive_seed(2, i));
    SolutionPath s{g, b.values, 0.0};  // solution = its own Brownian path
    data.brownian.push_back(b);
    data.solutions.push_back(std::move(s));
  }
  write_dataset(path, data, DatasetMeta{"free", "em", "fixed(0)", 2, ""});
  const auto terminal = read_terminal_samples(path);
  REQUIRE(terminal.size() == 3);
  for (int i = 0; i < 3; ++i) CHECK(terminal[i] == data.brownian[i].values.back());

  CHECK_THROWS_AS(read_terminal_samples(temp_file("sdeop_nonexistent.txt")), IoError);
  std::remove(path.c_str());
}

TEST_CASE("the terminal-sample reader rejects unrelated files") {
  const std::string path = temp_file("sdeop_test_not_samples.txt");
  std::ofstream(path) << "hello world\n1 2 3\n";
  CHECK_THROWS_AS(read_terminal_samples(path), FormatError);
  std::remove(path.c_str());
}

TEST_CASE("CDF emission lists each distinct value with its post-jump level") {
  const std::string path = temp_file("sdeop_test_ecdf.txt");
  const Ecdf e = make_ecdf(std::vector<double>{1.0, 2.0, 2.0, 3.0});
  emit_ecdf(path, e, {});
  std::ifstream in(path);
  std::string header;
  REQUIRE(std::getline(in, header));
  CHECK(header.find("# sdeop-ecdf v1") == 0);
  CHECK(header.find("n=4") != std::string::npos);
  std::vector<std::pair<double, double>> rows;
  double x, f;
  while (in >> x >> f) rows.emplace_back(x, f);
  REQUIRE(rows.size() == 3);  // distinct values only
  CHECK(rows[0] == std::pair{1.0, 0.25});
  CHECK(rows[1] == std::pair{2.0, 0.75});
  CHECK(rows[2] == std::pair{3.0, 1.0});
  std::remove(path.c_str());
}

TEST_CASE("multiscale and timing reports carry their header key-values") {
  const std::string ms_path = temp_file("sdeop_test_multiscale.txt");
  MultiscaleRow row;
  row.scale = 10.0;
  row.mean = 0.125;
  row.std_dev = 0.0625;
  row.n_paths = 8;
  row.n_failed = 1;
  emit_multiscale(ms_path, std::vector<MultiscaleRow>{row}, {{"model", "ou(a=1,b=1)"}});
  std::ifstream ms(ms_path);
  std::string line;
  REQUIRE(std::getline(ms, line));
  CHECK(line.find("# sdeop-multiscale v1") == 0);
  CHECK(line.find("model=ou(a=1,b=1)") != std::string::npos);
  REQUIRE(std::getline(ms, line));
  CHECK(line == "10 0.125 0.0625 8 failed=1");
  std::remove(ms_path.c_str());

  const std::string t_path = temp_file("sdeop_test_timing.txt");
  TimingRow tr;
  tr.method = "emp";
  tr.n = 100;
  tr.m = 31;
  tr.times = TimingTriple{0.5, 1.5, -1.0};
  emit_timing(t_path, std::vector<TimingRow>{tr}, {});
  std::ifstream tf(t_path);
  REQUIRE(std::getline(tf, line));
  CHECK(line.find("# sdeop-timing v1") == 0);
  REQUIRE(std::getline(tf, line));
  CHECK(line == "emp 100 31 0.5 1.5 x");  // unknown training time prints as x
  std::remove(t_path.c_str());
}
