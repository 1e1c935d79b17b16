#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ifa/grad.hpp"
#include "ifa/matrix.hpp"
#include "ifa/rng.hpp"

namespace ifa {

// Elementwise non-negative feature map replacing softmax. softplus is
// strictly positive; relu_eps is ReLU floored at 1e-6 so the degree
// normalizer cannot vanish on an otherwise all-zero row.
enum class KernelKind { softplus, relu_eps };

KernelKind kernel_from_string(const std::string& s);
const char* kernel_name(KernelKind k);

Matrix kernel_apply(KernelKind kf, const Matrix& x);
Matrix kernel_derivative(KernelKind kf, const Matrix& x);
double kernel_scalar(KernelKind kf, double x);

// Projection weights shared by every attention flavour. q/k project into a
// common inner dimension so their feature maps can be contracted.
struct AttentionParams {
  GradPair w_q;  // d_q x d
  GradPair w_k;  // d_k x d
  GradPair w_v;  // d_v x d

  static AttentionParams init(std::size_t d_q, std::size_t d_k, std::size_t d_v, std::size_t d,
                              Rng& rng);
  std::size_t inner_dim() const { return w_q.value.cols(); }
  void collect(const std::string& prefix, ParamRefs& out);
};

// Everything the linear-attention backward needs. Raw pre-kernel projections
// are kept instead of kernel derivatives: one elementwise pass at backward
// time in exchange for half the cache.
struct LinearAttentionCache {
  Matrix e_q, e_k, e_v;     // inputs
  Matrix raw_q, raw_k;      // projections before the kernel
  Matrix phi_q, phi_k, v;   // feature maps and projected values
  Matrix s;                 // phi(K)^T V, d x d
  Matrix z;                 // phi(K)^T 1, d x 1
  std::vector<double> denom;          // clamped per-query normalizers
  std::vector<std::uint8_t> clamped;  // 1 where the floor was active
  KernelKind kernel = KernelKind::softplus;
  bool normalized = true;
  bool valid = false;
};

struct AttentionOutput {
  Matrix output;  // m x d
  LinearAttentionCache cache;
};

struct AttentionInputGrads {
  Matrix e_q, e_k, e_v;
};

// Degree floor applied before inverting the per-query normalizer.
inline constexpr double kDegreeFloor = 1e-12;

// Row-normalized kernel attention evaluated in the O(m+n) order: the key-side
// summaries phi(K)^T V and phi(K)^T 1 are reduced first, then contracted with
// each query row. The m x n weight matrix is never materialized. Passing
// normalize=false skips the degree normalizer (the unstable raw form, kept
// for fault-injection checks).
AttentionOutput linear_attention_forward(const Matrix& e_q, const Matrix& e_k, const Matrix& e_v,
                                         const AttentionParams& params, KernelKind kf,
                                         bool normalize = true);

// Analytic gradient through the normalizer, key summaries and kernel map,
// also O((m+n) d^2). Accumulates projection grads, returns input grads.
AttentionInputGrads linear_attention_backward(const Matrix& out_grad,
                                              const LinearAttentionCache& cache,
                                              AttentionParams& params);

// ---- dense reference paths (tests, baselines, benchmarks) ----

struct DenseSoftmaxCache {
  Matrix e_q, e_k, e_v;
  Matrix q, k, v;
  Matrix weights;  // m x n row-stochastic
  bool valid = false;
};

// Standard scaled-dot-product attention with an explicit m x n weight
// matrix. Used by the pointwise baselines and as a behavioural reference.
Matrix dense_softmax_attention(const Matrix& e_q, const Matrix& e_k, const Matrix& e_v,
                               const AttentionParams& params, DenseSoftmaxCache* cache = nullptr);

AttentionInputGrads dense_softmax_attention_backward(const Matrix& out_grad,
                                                     const DenseSoftmaxCache& cache,
                                                     AttentionParams& params);

// Size guard for paths that materialize the m x n weight matrix.
inline constexpr std::size_t kDenseGuard = 10'000'000;

// Kernel attention evaluated in the quadratic order: forms the full weight
// matrix phi(Q) phi(K)^T, normalizes each row by its sum, multiplies by V.
// Deliberately independent of the linear path; ground truth in tests and the
// O(mn) side of the scaling benchmark. If `weights_out` is non-null the
// normalized weight matrix is copied there.
Matrix dense_kernel_attention_oracle(const Matrix& e_q, const Matrix& e_k, const Matrix& e_v,
                                     const AttentionParams& params, KernelKind kf,
                                     Matrix* weights_out = nullptr);

}  // namespace ifa
