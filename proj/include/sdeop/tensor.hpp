#pragma once

#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace sdeop {

// Dense row-major tensor of doubles, rank 1 or 2.  Deliberately minimal:
// just enough structure for small feed-forward and recurrent nets.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> data;
  bool requires_grad = false;

  Tensor() = default;
  Tensor(std::vector<int> s, std::vector<double> d) : shape(std::move(s)), data(std::move(d)) {}

  static Tensor zeros(std::vector<int> shape) {
    std::size_t n = 1;
    for (int d : shape) {
      if (d <= 0) throw std::invalid_argument("Tensor: dimensions must be positive");
      n *= static_cast<std::size_t>(d);
    }
    return Tensor(std::move(shape), std::vector<double>(n, 0.0));
  }
  static Tensor vector(std::vector<double> values) {
    const int n = static_cast<int>(values.size());
    if (n == 0) throw std::invalid_argument("Tensor: empty vector");
    return Tensor({n}, std::move(values));
  }
  static Tensor scalar(double v) { return Tensor({1}, {v}); }

  int rank() const { return static_cast<int>(shape.size()); }
  std::size_t size() const { return data.size(); }
  int rows() const { return shape[0]; }
  int cols() const { return rank() == 2 ? shape[1] : 1; }

  double& at(int i) { return data[static_cast<std::size_t>(i)]; }
  double at(int i) const { return data[static_cast<std::size_t>(i)]; }
  double& at(int i, int j) { return data[static_cast<std::size_t>(i) * shape[1] + j]; }
  double at(int i, int j) const { return data[static_cast<std::size_t>(i) * shape[1] + j]; }
};

inline std::string shape_string(const Tensor& t) {
  std::string s = "{";
  for (std::size_t i = 0; i < t.shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(t.shape[i]);
  }
  return s + "}";
}

}  // namespace sdeop
