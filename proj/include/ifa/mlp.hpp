#pragma once

#include <cstddef>
#include <vector>

#include "ifa/grad.hpp"
#include "ifa/matrix.hpp"
#include "ifa/rng.hpp"

namespace ifa {

// One fully-connected layer: weight (in x out) and bias (1 x out).
struct DenseLayer {
  GradPair w;
  GradPair b;
};

// ReLU hidden stack followed by a sigmoid scalar head. Input is m x in_dim,
// output is m x 1 with every entry in (0, 1).
struct MlpTower {
  std::vector<DenseLayer> hidden;
  GradPair w_out;  // last_hidden x 1
  GradPair b_out;  // 1 x 1

  static MlpTower init(std::size_t in_dim, const std::vector<std::size_t>& hidden_sizes,
                       Rng& rng);

  std::size_t in_dim() const;
  void collect(const std::string& prefix, ParamRefs& out);
};

// Intermediates retained by the forward pass for the analytic backward.
struct MlpCache {
  std::vector<Matrix> inputs;    // activation feeding each hidden layer
  std::vector<Matrix> preacts;   // pre-ReLU values per hidden layer
  Matrix last_hidden;            // input to the sigmoid head
  Matrix output;                 // m x 1 sigmoid output
  bool valid = false;
};

Matrix mlp_forward(const MlpTower& tower, const Matrix& input, MlpCache& cache);

// Accumulates parameter gradients and returns the gradient w.r.t. the input.
Matrix mlp_backward(MlpTower& tower, const Matrix& out_grad, const MlpCache& cache);

double sigmoid(double x);

}  // namespace ifa
