#pragma once

#include <cstdint>
#include <vector>

#include "ifa/grad.hpp"

namespace ifa {

enum class OptKind { sgd, adam };

// First/second moment buffers, parallel to a fixed parameter order.
struct AdamState {
  std::vector<Matrix> m;
  std::vector<Matrix> v;
};

// Plain SGD update: value -= lr * grad. Grads are zeroed afterwards.
void sgd_step(const ParamRefs& params, double lr);

// Adam update with bias correction; `t` is the 1-based step index.
void adam_step(const ParamRefs& params, AdamState& state, double lr, double beta1, double beta2,
               double eps, std::uint64_t t);

// Owns the optimizer kind, hyperparameters, moment state and step counter.
class Optimizer {
 public:
  Optimizer(OptKind kind, double lr, double beta1 = 0.9, double beta2 = 0.999,
            double eps = 1e-8)
      : kind_(kind), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(const ParamRefs& params);
  std::uint64_t steps_taken() const { return t_; }
  double lr() const { return lr_; }

 private:
  OptKind kind_;
  double lr_, beta1_, beta2_, eps_;
  std::uint64_t t_ = 0;
  AdamState state_;
};

}  // namespace ifa
