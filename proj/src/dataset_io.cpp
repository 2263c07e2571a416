#include "sdeop/dataset_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "sdeop/errors.hpp"
#include "sdeop/text_io.hpp"
#include "sdeop/version.hpp"

namespace sdeop {

namespace {

constexpr const char* kMagic = "# sdeop-dataset v1";

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && line[i] == ' ') ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace

void write_dataset(const std::string& path, const PathDataset& dataset,
                   const DatasetMeta& meta) {
  dataset.validate();
  std::ofstream out(path);
  if (!out) throw IoError("write_dataset: cannot open " + path);

  out << kMagic << " tool=" << kToolVersion << " t0=" << fmt_double(dataset.grid.t0)
      << " h=" << fmt_double(dataset.grid.h) << " M=" << dataset.grid.M
      << " paths=" << dataset.size();
  if (!meta.model.empty()) out << " model=" << meta.model;
  if (!meta.solver.empty()) out << " solver=" << meta.solver;
  if (!meta.x0_policy.empty()) out << " x0=" << meta.x0_policy;
  out << " base_seed=" << meta.base_seed;
  if (!meta.config_hash.empty()) out << " config_hash=" << meta.config_hash;
  if (dataset.emp_particles > 0) out << " emp_particles=" << dataset.emp_particles;
  out << "\n";

  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& b = dataset.brownian[i].values;
    const auto& x = dataset.solutions[i].values;
    for (int k = 0; k < dataset.grid.M; ++k) {
      out << i << ' ' << k << ' ' << fmt_double(dataset.grid.time(k)) << ' '
          << fmt_double(b[k]) << ' ' << fmt_double(x[k]) << "\n";
    }
  }
  if (!out) throw IoError("write_dataset: write failed for " + path);
}

DatasetFile read_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("read_dataset: cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) throw FormatError("read_dataset: empty file " + path, 1);
  if (line.rfind(kMagic, 0) != 0) {
    throw FormatError("read_dataset: missing '" + std::string(kMagic) + "' header in " + path, 1);
  }

  DatasetFile file;
  double t0 = 0.0, h = 0.0;
  int M = 0;
  std::size_t n_paths = 0;
  bool have_t0 = false, have_h = false, have_m = false, have_paths = false;

  for (auto token : split_ws(std::string_view(line).substr(std::string_view(kMagic).size()))) {
    const auto eq = token.find('=');
    if (eq == std::string_view::npos) {
      throw FormatError("read_dataset: bad header token '" + std::string(token) + "'", 1);
    }
    const auto key = token.substr(0, eq);
    const auto value = token.substr(eq + 1);
    const std::string value_str(value);
    if (key == "t0") {
      have_t0 = parse_double(value, t0);
    } else if (key == "h") {
      have_h = parse_double(value, h);
    } else if (key == "M") {
      have_m = parse_int(value, M);
    } else if (key == "paths") {
      int n = 0;
      have_paths = parse_int(value, n) && n >= 0;
      n_paths = static_cast<std::size_t>(n);
    } else if (key == "model") {
      file.meta.model = value_str;
    } else if (key == "solver") {
      file.meta.solver = value_str;
    } else if (key == "x0") {
      file.meta.x0_policy = value_str;
    } else if (key == "base_seed") {
      if (!parse_u64(value, file.meta.base_seed)) {
        throw FormatError("read_dataset: bad base_seed '" + value_str + "'", 1);
      }
    } else if (key == "config_hash") {
      file.meta.config_hash = value_str;
    } else if (key == "emp_particles") {
      if (!parse_int(value, file.data.emp_particles)) {
        throw FormatError("read_dataset: bad emp_particles '" + value_str + "'", 1);
      }
    }
    // unknown keys (e.g. tool) are carried by newer writers; ignore
  }
  if (!have_t0 || !have_h || !have_m || !have_paths) {
    throw FormatError("read_dataset: header must carry t0, h, M and paths", 1);
  }
  file.data.grid = make_grid(t0, h, M);
  file.data.brownian.assign(n_paths, BrownianPath{file.data.grid, {}, 0});
  file.data.solutions.assign(n_paths, SolutionPath{file.data.grid, {}, 0.0});
  for (auto& b : file.data.brownian) b.values.reserve(M);
  for (auto& s : file.data.solutions) s.values.reserve(M);

  std::size_t row = 1;
  std::size_t expect_path = 0;
  int expect_k = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto tokens = split_ws(line);
    if (tokens.size() != 5) {
      throw FormatError("read_dataset: expected 5 columns, got " +
                        std::to_string(tokens.size()), row);
    }
    int path_id = 0, k = 0;
    double t = 0.0, b = 0.0, x = 0.0;
    if (!parse_int(tokens[0], path_id) || !parse_int(tokens[1], k) ||
        !parse_double(tokens[2], t) || !parse_double(tokens[3], b) ||
        !parse_double(tokens[4], x)) {
      throw FormatError("read_dataset: malformed record", row);
    }
    if (static_cast<std::size_t>(path_id) != expect_path || k != expect_k) {
      throw FormatError("read_dataset: records out of order (path " + std::to_string(path_id) +
                        ", k " + std::to_string(k) + ")", row);
    }
    if (static_cast<std::size_t>(path_id) >= n_paths) {
      throw FormatError("read_dataset: path id beyond declared count", row);
    }
    // k is authoritative; the time column is a consistency check only
    if (std::abs(t - file.data.grid.time(k)) > 1e-12 * std::max(1.0, std::abs(t))) {
      throw FormatError("read_dataset: time column disagrees with grid", row);
    }
    file.data.brownian[path_id].values.push_back(b);
    auto& sol = file.data.solutions[path_id];
    sol.values.push_back(x);
    if (k == 0) sol.x0 = x;
    if (++expect_k == M) {
      expect_k = 0;
      ++expect_path;
    }
  }
  if (expect_path != n_paths || expect_k != 0) {
    throw FormatError("read_dataset: file ends mid-path (got " + std::to_string(expect_path) +
                      " of " + std::to_string(n_paths) + " paths)", row);
  }
  file.data.validate();
  return file;
}

}  // namespace sdeop
