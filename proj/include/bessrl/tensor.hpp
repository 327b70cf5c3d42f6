#pragma once

#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "bessrl/errors.hpp"
#include "bessrl/rng.hpp"

namespace bessrl {

// Dense row-major tensor of doubles. Only rank 1 and 2 are used in practice
// (vectors, weight matrices); the shape is kept generic so optimizer and
// checkpoint code can treat every parameter uniformly.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> values;

  Tensor() = default;
  Tensor(std::vector<int> s, std::vector<double> v) : shape(std::move(s)), values(std::move(v)) {
    if (static_cast<int>(values.size()) != shape_product(shape))
      throw ShapeError("tensor: value count does not match shape");
  }

  static int shape_product(const std::vector<int>& s) {
    int n = 1;
    for (int d : s) {
      if (d < 0) throw ShapeError("tensor: negative dimension");
      n *= d;
    }
    return n;
  }

  static Tensor zeros(std::vector<int> s) {
    int n = shape_product(s);
    return Tensor(std::move(s), std::vector<double>(static_cast<size_t>(n), 0.0));
  }

  static Tensor scalar(double v) { return Tensor({1}, {v}); }

  static Tensor uniform(std::vector<int> s, double lo, double hi, Rng& rng) {
    Tensor t = zeros(std::move(s));
    for (double& v : t.values) v = rng.uniform(lo, hi);
    return t;
  }

  int size() const { return static_cast<int>(values.size()); }
  int rank() const { return static_cast<int>(shape.size()); }
  int dim(int i) const { return shape[static_cast<size_t>(i)]; }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }

  double& operator[](int i) { return values[static_cast<size_t>(i)]; }
  double operator[](int i) const { return values[static_cast<size_t>(i)]; }

  // 2-D access, row-major
  double& at(int r, int c) { return values[static_cast<size_t>(r * shape[1] + c)]; }
  double at(int r, int c) const { return values[static_cast<size_t>(r * shape[1] + c)]; }

  double* data() { return values.data(); }
  const double* data() const { return values.data(); }

  void fill(double v) { std::fill(values.begin(), values.end(), v); }

  bool all_finite() const {
    for (double v : values)
      if (!std::isfinite(v)) return false;
    return true;
  }
};

inline void require_same_shape(const Tensor& a, const Tensor& b, const char* where) {
  if (!a.same_shape(b)) throw ShapeError(std::string(where) + ": shape mismatch");
}

}  // namespace bessrl
