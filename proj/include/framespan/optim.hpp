#pragma once

#include <cmath>
#include <vector>

#include "framespan/params.hpp"
#include "framespan/rng.hpp"
#include "framespan/tensor.hpp"

namespace framespan {

struct AdamConfig {
  double lr = 0.0005;
  double beta1 = 0.01;
  double beta2 = 0.9999;
  double eps = 1e-8;
};

// Adam with bias correction. Moment accumulators live on the parameters so
// they serialize with the model; the step counter lives here.
class Adam {
 public:
  explicit Adam(AdamConfig cfg) : cfg_(cfg) {}

  void step(const std::vector<Parameter*>& params) {
    ++t_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (Parameter* p : params) {
      for (size_t k = 0; k < p->value.size(); ++k) {
        const double g = p->grad.v[k];
        p->m.v[k] = cfg_.beta1 * p->m.v[k] + (1.0 - cfg_.beta1) * g;
        p->s.v[k] = cfg_.beta2 * p->s.v[k] + (1.0 - cfg_.beta2) * g * g;
        const double mhat = p->m.v[k] / c1;
        const double shat = p->s.v[k] / c2;
        p->value.v[k] -= cfg_.lr * mhat / (std::sqrt(shat) + cfg_.eps);
      }
    }
  }

  long steps() const { return t_; }
  void set_steps(long t) { t_ = t; }
  const AdamConfig& config() const { return cfg_; }

 private:
  AdamConfig cfg_;
  long t_ = 0;
};

// Scales all gradients so their global 2-norm is at most max_norm. Returns
// the norm before clipping. Applying it twice changes nothing.
inline double clip_gradients(const std::vector<Parameter*>& params, double max_norm) {
  double sq = 0.0;
  for (Parameter* p : params)
    for (double g : p->grad.v) sq += g * g;
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const double scale = max_norm / norm;
    for (Parameter* p : params)
      for (double& g : p->grad.v) g *= scale;
  }
  return norm;
}

// Inverted-dropout mask: entries are 0 with probability rate, else
// 1/(1-rate), so expected activations match prediction time, where no mask
// is applied at all. rate <= 0 returns all ones without consuming the rng.
inline Tensor dropout_mask(const std::vector<int>& shape, double rate, Rng& rng) {
  Tensor t(shape);
  if (rate <= 0.0) {
    for (double& x : t.v) x = 1.0;
    return t;
  }
  if (rate >= 1.0) throw error(detail::cat("dropout_mask: rate ", rate, " out of range"));
  const double keep = 1.0 / (1.0 - rate);
  for (double& x : t.v) x = rng.uniform() < rate ? 0.0 : keep;
  return t;
}

}  // namespace framespan
