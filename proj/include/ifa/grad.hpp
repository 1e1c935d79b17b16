#pragma once

#include <string>
#include <vector>

#include "ifa/matrix.hpp"

namespace ifa {

// A trainable tensor and its gradient accumulator. Gradients are summed by
// backward passes and zeroed by the optimizer step that consumes them.
struct GradPair {
  Matrix value;
  Matrix grad;

  GradPair() = default;
  GradPair(std::size_t rows, std::size_t cols)
      : value(rows, cols, 0.0), grad(rows, cols, 0.0) {}

  void zero_grad() { grad.zero(); }
};

struct NamedParam {
  std::string name;
  GradPair* param = nullptr;
};

// Flat, fixed-order view over a model's trainable tensors. The order is part
// of the contract: optimizer state and checkpoints index into it.
using ParamRefs = std::vector<NamedParam>;

inline double global_grad_norm(const ParamRefs& params) {
  double s = 0.0;
  for (const auto& np : params) s += np.param->grad.frob_norm_sq();
  return std::sqrt(s);
}

inline void scale_grads(const ParamRefs& params, double s) {
  for (const auto& np : params) scale_inplace(np.param->grad, s);
}

inline void zero_grads(const ParamRefs& params) {
  for (const auto& np : params) np.param->zero_grad();
}

}  // namespace ifa
