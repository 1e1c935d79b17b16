#include "ifa/mlp.hpp"

#include <cmath>
#include <string>

#include "ifa/errors.hpp"

namespace ifa {

double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

MlpTower MlpTower::init(std::size_t in_dim, const std::vector<std::size_t>& hidden_sizes,
                        Rng& rng) {
  if (in_dim == 0) throw ConfigError("mlp: input dim must be >= 1");
  MlpTower t;
  std::size_t cur = in_dim;
  for (std::size_t h : hidden_sizes) {
    if (h == 0) throw ConfigError("mlp: hidden size must be >= 1");
    DenseLayer layer;
    layer.w = GradPair(cur, h);
    layer.b = GradPair(1, h);
    fill_normal(layer.w.value, rng, 0.0, std::sqrt(2.0 / static_cast<double>(cur)));
    t.hidden.push_back(std::move(layer));
    cur = h;
  }
  t.w_out = GradPair(cur, 1);
  t.b_out = GradPair(1, 1);
  fill_normal(t.w_out.value, rng, 0.0, 1.0 / std::sqrt(static_cast<double>(cur)));
  return t;
}

std::size_t MlpTower::in_dim() const {
  if (!hidden.empty()) return hidden.front().w.value.rows();
  return w_out.value.rows();
}

void MlpTower::collect(const std::string& prefix, ParamRefs& out) {
  for (std::size_t l = 0; l < hidden.size(); ++l) {
    out.push_back({prefix + ".w" + std::to_string(l), &hidden[l].w});
    out.push_back({prefix + ".b" + std::to_string(l), &hidden[l].b});
  }
  out.push_back({prefix + ".w_out", &w_out});
  out.push_back({prefix + ".b_out", &b_out});
}

Matrix mlp_forward(const MlpTower& tower, const Matrix& input, MlpCache& cache) {
  if (input.cols() != tower.in_dim())
    throw DimensionError("mlp_forward: input cols " + std::to_string(input.cols()) +
                         " != tower in_dim " + std::to_string(tower.in_dim()));
  cache = MlpCache{};
  Matrix cur = input;
  for (const DenseLayer& layer : tower.hidden) {
    cache.inputs.push_back(cur);
    Matrix z = matmul(cur, layer.w.value);
    add_row_broadcast_inplace(z, layer.b.value);
    cache.preacts.push_back(z);
    for (double& v : z.flat()) v = v > 0.0 ? v : 0.0;
    cur = std::move(z);
  }
  cache.last_hidden = cur;
  Matrix logits = matmul(cur, tower.w_out.value);
  const double b = tower.b_out.value(0, 0);
  Matrix out(logits.rows(), 1);
  for (std::size_t i = 0; i < logits.rows(); ++i) out(i, 0) = sigmoid(logits(i, 0) + b);
  cache.output = out;
  cache.valid = true;
  return out;
}

Matrix mlp_backward(MlpTower& tower, const Matrix& out_grad, const MlpCache& cache) {
  if (!cache.valid) throw UsageError("mlp_backward: cache missing or stale");
  if (!out_grad.same_shape(cache.output))
    throw UsageError("mlp_backward: out_grad shape does not match cached forward");

  // Sigmoid head: d logit = d y * y * (1 - y).
  Matrix dlogit(out_grad.rows(), 1);
  for (std::size_t i = 0; i < out_grad.rows(); ++i) {
    const double y = cache.output(i, 0);
    dlogit(i, 0) = out_grad(i, 0) * y * (1.0 - y);
  }
  add_inplace(tower.w_out.grad, matmul_tn(cache.last_hidden, dlogit));
  tower.b_out.grad(0, 0) += dlogit.sum();
  Matrix dcur = matmul_nt(dlogit, tower.w_out.value);

  for (std::size_t li = tower.hidden.size(); li-- > 0;) {
    DenseLayer& layer = tower.hidden[li];
    const Matrix& pre = cache.preacts[li];
    Matrix dz = dcur;
    auto dzf = dz.flat();
    auto pf = pre.flat();
    for (std::size_t i = 0; i < dzf.size(); ++i) {
      if (pf[i] <= 0.0) dzf[i] = 0.0;
    }
    add_inplace(layer.w.grad, matmul_tn(cache.inputs[li], dz));
    add_inplace(layer.b.grad, col_sums(dz));
    dcur = matmul_nt(dz, layer.w.value);
  }
  return dcur;
}

}  // namespace ifa
