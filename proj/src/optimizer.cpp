#include "ifa/optimizer.hpp"

#include <cmath>

#include "ifa/errors.hpp"

namespace ifa {

namespace {

void check_finite_grads(const ParamRefs& params) {
  for (const auto& np : params) {
    if (!np.param->grad.all_finite())
      throw TrainingError("non-finite gradient in parameter '" + np.name + "'");
  }
}

}  // namespace

void sgd_step(const ParamRefs& params, double lr) {
  if (lr < 0.0) throw ConfigError("sgd: learning rate must be >= 0");
  check_finite_grads(params);
  for (const auto& np : params) {
    axpy_inplace(np.param->value, -lr, np.param->grad);
    np.param->zero_grad();
  }
}

void adam_step(const ParamRefs& params, AdamState& state, double lr, double beta1, double beta2,
               double eps, std::uint64_t t) {
  if (t == 0) throw UsageError("adam: step index is 1-based");
  check_finite_grads(params);
  if (state.m.size() != params.size()) {
    state.m.clear();
    state.v.clear();
    for (const auto& np : params) {
      state.m.emplace_back(np.param->value.rows(), np.param->value.cols());
      state.v.emplace_back(np.param->value.rows(), np.param->value.cols());
    }
  }
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
  for (std::size_t p = 0; p < params.size(); ++p) {
    GradPair& gp = *params[p].param;
    auto val = gp.value.flat();
    auto g = gp.grad.flat();
    auto m = state.m[p].flat();
    auto v = state.v[p].flat();
    for (std::size_t i = 0; i < val.size(); ++i) {
      m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
      v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      val[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
    gp.zero_grad();
  }
}

void Optimizer::step(const ParamRefs& params) {
  ++t_;
  if (kind_ == OptKind::sgd) {
    sgd_step(params, lr_);
  } else {
    adam_step(params, state_, lr_, beta1_, beta2_, eps_, t_);
  }
}

}  // namespace ifa
