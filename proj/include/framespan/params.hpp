#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "framespan/rng.hpp"
#include "framespan/tensor.hpp"

namespace framespan {

// A named learned tensor with its gradient and Adam moment accumulators.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
  Tensor m;  // first moment
  Tensor s;  // second moment

  Parameter(std::string nm, std::vector<int> shape)
      : name(std::move(nm)), value(shape), grad(shape), m(shape), s(shape) {}
};

// Owns all parameters of one model in creation order. Creation order is the
// serialization order, so a fixed construction sequence gives reproducible
// checkpoints.
class ParameterStore {
 public:
  // Zero-initialized parameter (biases, special rows).
  Parameter& add(const std::string& name, std::vector<int> shape) {
    if (index_.count(name)) throw error("ParameterStore: duplicate parameter " + name);
    params_.push_back(std::make_unique<Parameter>(name, std::move(shape)));
    index_[name] = params_.size() - 1;
    return *params_.back();
  }

  // Uniform init in [-x, x] with x = sqrt(6 / (fan_in + fan_out)). For a
  // matrix [r x c], fan_in = c and fan_out = r; a vector [n] is treated as a
  // 1 x n matrix.
  Parameter& add_uniform(const std::string& name, std::vector<int> shape, Rng& rng) {
    Parameter& p = add(name, shape);
    int fan_in = p.value.shape.empty() ? 1 : p.value.shape.back();
    int fan_out = 1;
    for (size_t k = 0; k + 1 < p.value.shape.size(); ++k) fan_out *= p.value.shape[k];
    double x = std::sqrt(6.0 / (fan_in + fan_out));
    for (double& w : p.value.v) w = rng.uniform(-x, x);
    return p;
  }

  Parameter* find(const std::string& name) {
    auto it = index_.find(name);
    return it == index_.end() ? nullptr : params_[it->second].get();
  }

  Parameter& get(const std::string& name) {
    Parameter* p = find(name);
    if (!p) throw error("ParameterStore: unknown parameter " + name);
    return *p;
  }

  std::vector<Parameter*> all() {
    std::vector<Parameter*> out;
    out.reserve(params_.size());
    for (auto& p : params_) out.push_back(p.get());
    return out;
  }

  std::vector<const Parameter*> all() const {
    std::vector<const Parameter*> out;
    out.reserve(params_.size());
    for (const auto& p : params_) out.push_back(p.get());
    return out;
  }

  void zero_grads() {
    for (auto& p : params_)
      std::fill(p->grad.v.begin(), p->grad.v.end(), 0.0);
  }

  size_t count() const { return params_.size(); }

  size_t value_count() const {
    size_t n = 0;
    for (auto& p : params_) n += p->value.size();
    return n;
  }

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
  std::unordered_map<std::string, size_t> index_;
};

}  // namespace framespan
