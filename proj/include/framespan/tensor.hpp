#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "framespan/error.hpp"

namespace framespan {

// Dense row-major float64 tensor. Rank 0 is a scalar holding one value.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> v;

  Tensor() : v(1, 0.0) {}

  explicit Tensor(std::vector<int> shp) : shape(std::move(shp)), v(size_of(shape), 0.0) {}

  Tensor(std::vector<int> shp, std::vector<double> vals) : shape(std::move(shp)), v(std::move(vals)) {
    if (v.size() != size_of(shape))
      throw error(detail::cat("Tensor: ", v.size(), " values for shape ", shape_str(shape)));
  }

  static Tensor scalar(double x) {
    Tensor t;
    t.v[0] = x;
    return t;
  }

  static size_t size_of(const std::vector<int>& shape) {
    size_t n = 1;
    for (int d : shape) {
      if (d <= 0) throw error(detail::cat("Tensor: non-positive dimension in ", shape_str(shape)));
      n *= static_cast<size_t>(d);
    }
    return n;
  }

  size_t size() const { return v.size(); }
  bool is_scalar() const { return shape.empty(); }
  bool is_vector() const { return shape.size() == 1; }
  bool is_matrix() const { return shape.size() == 2; }

  int rows() const { return shape.at(0); }
  int cols() const { return shape.at(1); }

  double& at(int i) { return v[static_cast<size_t>(i)]; }
  double at(int i) const { return v[static_cast<size_t>(i)]; }
  double& at(int r, int c) { return v[static_cast<size_t>(r) * cols() + c]; }
  double at(int r, int c) const { return v[static_cast<size_t>(r) * cols() + c]; }

  bool finite() const {
    for (double x : v)
      if (!std::isfinite(x)) return false;
    return true;
  }

  bool operator==(const Tensor& o) const { return shape == o.shape && v == o.v; }
};

}  // namespace framespan
