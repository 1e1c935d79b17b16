#include "ifa/attention.hpp"

#include <cmath>
#include <string>

#include "ifa/errors.hpp"
#include "ifa/log.hpp"

namespace ifa {

KernelKind kernel_from_string(const std::string& s) {
  if (s == "softplus") return KernelKind::softplus;
  if (s == "relu_eps") return KernelKind::relu_eps;
  throw ConfigError("unknown kernel '" + s + "' (expected softplus|relu_eps)");
}

const char* kernel_name(KernelKind k) {
  return k == KernelKind::softplus ? "softplus" : "relu_eps";
}

namespace {

constexpr double kReluEps = 1e-6;

double softplus(double x) {
  // ln(1 + e^x), evaluated as x + ln(1 + e^-x) for positive x to avoid
  // overflow of e^x.
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

}  // namespace

double kernel_scalar(KernelKind kf, double x) {
  if (kf == KernelKind::softplus) return softplus(x);
  return (x > 0.0 ? x : 0.0) + kReluEps;
}

Matrix kernel_apply(KernelKind kf, const Matrix& x) {
  Matrix out = x;
  if (kf == KernelKind::softplus) {
    for (double& v : out.flat()) v = softplus(v);
  } else {
    for (double& v : out.flat()) v = (v > 0.0 ? v : 0.0) + kReluEps;
  }
  return out;
}

Matrix kernel_derivative(KernelKind kf, const Matrix& x) {
  Matrix out = x;
  if (kf == KernelKind::softplus) {
    // d/dx softplus = sigmoid
    for (double& v : out.flat()) {
      if (v >= 0.0) {
        v = 1.0 / (1.0 + std::exp(-v));
      } else {
        const double e = std::exp(v);
        v = e / (1.0 + e);
      }
    }
  } else {
    for (double& v : out.flat()) v = v > 0.0 ? 1.0 : 0.0;
  }
  return out;
}

AttentionParams AttentionParams::init(std::size_t d_q, std::size_t d_k, std::size_t d_v,
                                      std::size_t d, Rng& rng) {
  if (d == 0 || d_q == 0 || d_k == 0 || d_v == 0)
    throw ConfigError("attention: all projection dims must be >= 1");
  AttentionParams p;
  p.w_q = GradPair(d_q, d);
  p.w_k = GradPair(d_k, d);
  p.w_v = GradPair(d_v, d);
  fill_normal(p.w_q.value, rng, 0.0, 1.0 / std::sqrt(static_cast<double>(d_q)));
  fill_normal(p.w_k.value, rng, 0.0, 1.0 / std::sqrt(static_cast<double>(d_k)));
  fill_normal(p.w_v.value, rng, 0.0, 1.0 / std::sqrt(static_cast<double>(d_v)));
  return p;
}

void AttentionParams::collect(const std::string& prefix, ParamRefs& out) {
  out.push_back({prefix + ".w_q", &w_q});
  out.push_back({prefix + ".w_k", &w_k});
  out.push_back({prefix + ".w_v", &w_v});
}

namespace {

void check_attention_shapes(const Matrix& e_q, const Matrix& e_k, const Matrix& e_v,
                            const AttentionParams& p, const char* who) {
  if (e_q.rows() == 0 || e_k.rows() == 0)
    throw DimensionError(std::string(who) + ": empty query or key set");
  if (e_k.rows() != e_v.rows())
    throw DimensionError(std::string(who) + ": key rows != value rows");
  if (e_q.cols() != p.w_q.value.rows())
    throw DimensionError(std::string(who) + ": query width does not match w_q");
  if (e_k.cols() != p.w_k.value.rows())
    throw DimensionError(std::string(who) + ": key width does not match w_k");
  if (e_v.cols() != p.w_v.value.rows())
    throw DimensionError(std::string(who) + ": value width does not match w_v");
  if (p.w_q.value.cols() != p.w_k.value.cols())
    throw DimensionError(std::string(who) + ": w_q and w_k inner dims differ");
}

}  // namespace

AttentionOutput linear_attention_forward(const Matrix& e_q, const Matrix& e_k, const Matrix& e_v,
                                         const AttentionParams& params, KernelKind kf,
                                         bool normalize) {
  check_attention_shapes(e_q, e_k, e_v, params, "linear_attention");
  const std::size_t m = e_q.rows();

  LinearAttentionCache c;
  c.e_q = e_q;
  c.e_k = e_k;
  c.e_v = e_v;
  c.raw_q = matmul(e_q, params.w_q.value);
  c.raw_k = matmul(e_k, params.w_k.value);
  c.v = matmul(e_v, params.w_v.value);
  c.phi_q = kernel_apply(kf, c.raw_q);
  c.phi_k = kernel_apply(kf, c.raw_k);

  // Key-side reductions, O(n d^2) and O(n d).
  c.s = matmul_tn(c.phi_k, c.v);
  c.z = col_sums(c.phi_k).transposed();  // d x 1

  // Query-side contractions, O(m d^2) and O(m d).
  Matrix out = matmul(c.phi_q, c.s);
  Matrix raw_denom = matmul(c.phi_q, c.z);  // m x 1

  c.denom.assign(m, 1.0);
  c.clamped.assign(m, 0);
  if (normalize) {
    std::size_t floored = 0;
    for (std::size_t i = 0; i < m; ++i) {
      double d = raw_denom(i, 0);
      if (d < kDegreeFloor) {
        d = kDegreeFloor;
        c.clamped[i] = 1;
        ++floored;
      }
      c.denom[i] = d;
    }
    if (floored > 0)
      log_warn("linear_attention: " + std::to_string(floored) +
               " degenerate query row(s) hit the degree floor");
    for (std::size_t i = 0; i < m; ++i) {
      double* r = out.row_ptr(i);
      const double inv = 1.0 / c.denom[i];
      for (std::size_t j = 0; j < out.cols(); ++j) r[j] *= inv;
    }
  }
  c.kernel = kf;
  c.normalized = normalize;
  c.valid = true;
  return {std::move(out), std::move(c)};
}

AttentionInputGrads linear_attention_backward(const Matrix& out_grad,
                                              const LinearAttentionCache& c,
                                              AttentionParams& params) {
  if (!c.valid) throw UsageError("linear_attention_backward: cache missing or stale");
  if (out_grad.rows() != c.phi_q.rows() || out_grad.cols() != c.s.cols())
    throw UsageError("linear_attention_backward: out_grad shape does not match cached forward");

  const std::size_t m = out_grad.rows();
  const std::size_t d = out_grad.cols();

  // Output row i is U_i / D_i with U = phi(Q) S and D_i = phi(Q)_i . z.
  // d L/d U scales each row by 1/D_i; d L/d D_i is -(G_i . U_i) / D_i^2,
  // blocked where the floor was active.
  Matrix g_num = out_grad;  // becomes dL/dU
  Matrix g_den(m, 1, 0.0);  // dL/d raw denom
  if (c.normalized) {
    Matrix numer = matmul(c.phi_q, c.s);
    for (std::size_t i = 0; i < m; ++i) {
      const double inv = 1.0 / c.denom[i];
      double* gn = g_num.row_ptr(i);
      const double* go = out_grad.row_ptr(i);
      const double* un = numer.row_ptr(i);
      double gdotu = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        gdotu += go[j] * un[j];
        gn[j] = go[j] * inv;
      }
      if (!c.clamped[i]) g_den(i, 0) = -gdotu / (c.denom[i] * c.denom[i]);
    }
  }

  // phi(Q) enters both the numerator and the normalizer.
  Matrix d_phi_q = matmul_nt(g_num, c.s);  // m x d
  if (c.normalized) {
    for (std::size_t i = 0; i < m; ++i) {
      double* r = d_phi_q.row_ptr(i);
      const double gd = g_den(i, 0);
      for (std::size_t j = 0; j < d; ++j) r[j] += gd * c.z(j, 0);
    }
  }
  Matrix d_s = matmul_tn(c.phi_q, g_num);  // d x d
  Matrix d_z(d, 1, 0.0);
  if (c.normalized) {
    for (std::size_t i = 0; i < m; ++i) {
      const double gd = g_den(i, 0);
      const double* pq = c.phi_q.row_ptr(i);
      for (std::size_t j = 0; j < d; ++j) d_z(j, 0) += pq[j] * gd;
    }
  }

  // S = phi(K)^T V and z = phi(K)^T 1.
  Matrix d_phi_k = matmul_nt(c.v, d_s);  // n x d
  for (std::size_t r = 0; r < d_phi_k.rows(); ++r) {
    double* row = d_phi_k.row_ptr(r);
    for (std::size_t j = 0; j < d; ++j) row[j] += d_z(j, 0);
  }
  Matrix d_v = matmul(c.phi_k, d_s);  // n x d

  // Through the kernel's elementwise derivative, recomputed from raw values.
  Matrix d_raw_q = hadamard(d_phi_q, kernel_derivative(c.kernel, c.raw_q));
  Matrix d_raw_k = hadamard(d_phi_k, kernel_derivative(c.kernel, c.raw_k));

  // Projections.
  add_inplace(params.w_q.grad, matmul_tn(c.e_q, d_raw_q));
  add_inplace(params.w_k.grad, matmul_tn(c.e_k, d_raw_k));
  add_inplace(params.w_v.grad, matmul_tn(c.e_v, d_v));

  AttentionInputGrads g;
  g.e_q = matmul_nt(d_raw_q, params.w_q.value);
  g.e_k = matmul_nt(d_raw_k, params.w_k.value);
  g.e_v = matmul_nt(d_v, params.w_v.value);
  return g;
}

Matrix dense_softmax_attention(const Matrix& e_q, const Matrix& e_k, const Matrix& e_v,
                               const AttentionParams& params, DenseSoftmaxCache* cache) {
  check_attention_shapes(e_q, e_k, e_v, params, "dense_softmax_attention");
  if (e_q.rows() * e_k.rows() > kDenseGuard)
    throw UsageError("dense_softmax_attention: m*n exceeds the dense size guard");

  Matrix q = matmul(e_q, params.w_q.value);
  Matrix k = matmul(e_k, params.w_k.value);
  Matrix v = matmul(e_v, params.w_v.value);
  const double scale = 1.0 / std::sqrt(static_cast<double>(q.cols()));

  Matrix w = matmul_nt(q, k);
  scale_inplace(w, scale);
  // Row softmax, max-subtracted.
  for (std::size_t i = 0; i < w.rows(); ++i) {
    double* r = w.row_ptr(i);
    double mx = r[0];
    for (std::size_t j = 1; j < w.cols(); ++j) mx = std::max(mx, r[j]);
    double s = 0.0;
    for (std::size_t j = 0; j < w.cols(); ++j) {
      r[j] = std::exp(r[j] - mx);
      s += r[j];
    }
    const double inv = 1.0 / s;
    for (std::size_t j = 0; j < w.cols(); ++j) r[j] *= inv;
  }
  Matrix out = matmul(w, v);
  if (cache != nullptr) {
    cache->e_q = e_q;
    cache->e_k = e_k;
    cache->e_v = e_v;
    cache->q = std::move(q);
    cache->k = std::move(k);
    cache->v = std::move(v);
    cache->weights = std::move(w);
    cache->valid = true;
  }
  return out;
}

AttentionInputGrads dense_softmax_attention_backward(const Matrix& out_grad,
                                                     const DenseSoftmaxCache& c,
                                                     AttentionParams& params) {
  if (!c.valid) throw UsageError("dense_softmax_attention_backward: cache missing");
  if (out_grad.rows() != c.weights.rows() || out_grad.cols() != c.v.cols())
    throw UsageError("dense_softmax_attention_backward: out_grad shape mismatch");

  const double scale = 1.0 / std::sqrt(static_cast<double>(c.q.cols()));

  Matrix d_v = matmul_tn(c.weights, out_grad);
  Matrix d_w = matmul_nt(out_grad, c.v);  // m x n

  // Softmax jacobian per row: dA = W .* (dW - (dW . W) 1^T).
  Matrix d_a = d_w;
  for (std::size_t i = 0; i < d_a.rows(); ++i) {
    const double* wr = c.weights.row_ptr(i);
    double* dr = d_a.row_ptr(i);
    double dot = 0.0;
    for (std::size_t j = 0; j < d_a.cols(); ++j) dot += dr[j] * wr[j];
    for (std::size_t j = 0; j < d_a.cols(); ++j) dr[j] = wr[j] * (dr[j] - dot);
  }
  scale_inplace(d_a, scale);

  Matrix d_q = matmul(d_a, c.k);
  Matrix d_k = matmul_tn(d_a, c.q);

  add_inplace(params.w_q.grad, matmul_tn(c.e_q, d_q));
  add_inplace(params.w_k.grad, matmul_tn(c.e_k, d_k));
  add_inplace(params.w_v.grad, matmul_tn(c.e_v, d_v));

  AttentionInputGrads g;
  g.e_q = matmul_nt(d_q, params.w_q.value);
  g.e_k = matmul_nt(d_k, params.w_k.value);
  g.e_v = matmul_nt(d_v, params.w_v.value);
  return g;
}

Matrix dense_kernel_attention_oracle(const Matrix& e_q, const Matrix& e_k, const Matrix& e_v,
                                     const AttentionParams& params, KernelKind kf,
                                     Matrix* weights_out) {
  check_attention_shapes(e_q, e_k, e_v, params, "dense_kernel_attention");
  if (e_q.rows() * e_k.rows() > kDenseGuard)
    throw UsageError("dense_kernel_attention: m*n exceeds the dense size guard");

  Matrix phi_q = kernel_apply(kf, matmul(e_q, params.w_q.value));
  Matrix phi_k = kernel_apply(kf, matmul(e_k, params.w_k.value));
  Matrix v = matmul(e_v, params.w_v.value);

  Matrix w = matmul_nt(phi_q, phi_k);  // m x n, all entries >= 0 by kernel construction
  for (std::size_t i = 0; i < w.rows(); ++i) {
    double* r = w.row_ptr(i);
    double s = 0.0;
    for (std::size_t j = 0; j < w.cols(); ++j) s += r[j];
    s = std::max(s, kDegreeFloor);
    const double inv = 1.0 / s;
    for (std::size_t j = 0; j < w.cols(); ++j) r[j] *= inv;
  }
  Matrix out = matmul(w, v);
  if (weights_out != nullptr) *weights_out = std::move(w);
  return out;
}

}  // namespace ifa
