#include "ifa/selfcheck.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ifa/attention.hpp"
#include "ifa/fd.hpp"
#include "ifa/loss.hpp"
#include "ifa/matrix.hpp"
#include "ifa/metrics.hpp"
#include "ifa/model.hpp"
#include "ifa/rng.hpp"

namespace ifa {

namespace {

struct AttnInstance {
  Matrix e_q, e_k, e_v;
  AttentionParams params;
  KernelKind kernel;
};

AttnInstance random_instance(Rng& rng, std::size_t max_mn, std::size_t max_d) {
  AttnInstance in;
  const std::size_t m = 1 + rng.pick(max_mn);
  const std::size_t n = 1 + rng.pick(max_mn);
  const std::size_t dq = 1 + rng.pick(max_d);
  const std::size_t dk = 1 + rng.pick(max_d);
  const std::size_t dv = 1 + rng.pick(max_d);
  const std::size_t d = 1 + rng.pick(max_d);
  in.e_q = Matrix(m, dq);
  in.e_k = Matrix(n, dk);
  in.e_v = Matrix(n, dv);
  fill_uniform(in.e_q, rng, -1.0, 1.0);
  fill_uniform(in.e_k, rng, -1.0, 1.0);
  fill_uniform(in.e_v, rng, -1.0, 1.0);
  in.params = AttentionParams::init(dq, dk, dv, d, rng);
  in.kernel = rng.u01() < 0.5 ? KernelKind::softplus : KernelKind::relu_eps;
  return in;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

}  // namespace

SuiteResult check_matmul_associativity(std::uint64_t seed, std::size_t trials) {
  Rng rng(seed);
  double worst = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    const std::size_t a = 1 + rng.pick(32), b = 1 + rng.pick(32), c = 1 + rng.pick(32),
                      d = 1 + rng.pick(32);
    Matrix A(a, b), B(b, c), C(c, d);
    fill_uniform(A, rng, -1.0, 1.0);
    fill_uniform(B, rng, -1.0, 1.0);
    fill_uniform(C, rng, -1.0, 1.0);
    const Matrix left = matmul(matmul(A, B), C);
    const Matrix right = matmul(A, matmul(B, C));
    const double denom = std::max(right.max_abs(), 1e-300);
    worst = std::max(worst, sub(left, right).max_abs() / denom);
  }
  return {"matmul_associativity", worst < 1e-12, worst, "tol 1e-12"};
}

SuiteResult check_kernel_values() {
  double worst = 0.0;
  auto track = [&worst](double err) { worst = std::max(worst, err); };

  track(std::fabs(kernel_scalar(KernelKind::softplus, 0.0) - std::log(2.0)));
  track(std::fabs(kernel_scalar(KernelKind::relu_eps, -5.0) - 1e-6));
  track(std::fabs(kernel_scalar(KernelKind::relu_eps, 2.5) - (2.5 + 1e-6)));
  // Overflow-safe branch: softplus(30) = 30 + ln(1+e^-30), within 1e-9 of 30.
  const double sp30 = kernel_scalar(KernelKind::softplus, 30.0);
  track(std::fabs(sp30 - 30.0) > 1e-9 ? std::fabs(sp30 - 30.0) : 0.0);
  bool ok = worst < 1e-12;
  // No overflow at extreme inputs, and non-negativity everywhere.
  for (double x : {-745.0, -100.0, -1.0, 0.0, 1.0, 100.0, 745.0}) {
    for (KernelKind k : {KernelKind::softplus, KernelKind::relu_eps}) {
      const double v = kernel_scalar(k, x);
      if (!std::isfinite(v) || v < 0.0) ok = false;
    }
  }
  return {"kernel_values", ok, worst, "analytic values and overflow safety"};
}

SuiteResult check_oracle_equivalence(std::uint64_t seed, std::size_t instances,
                                     bool fault_skip_norm) {
  Rng rng(seed);
  double worst = 0.0;
  for (std::size_t t = 0; t < instances; ++t) {
    AttnInstance in = random_instance(rng, 64, 16);
    const AttentionOutput lin = linear_attention_forward(in.e_q, in.e_k, in.e_v, in.params,
                                                         in.kernel, !fault_skip_norm);
    const Matrix ref =
        dense_kernel_attention_oracle(in.e_q, in.e_k, in.e_v, in.params, in.kernel);
    worst = std::max(worst, max_scaled_rel_err(lin.output, ref));
    if (!lin.output.all_finite()) worst = HUGE_VAL;
  }
  const bool pass = worst <= 1e-10;
  return {"oracle_equivalence", pass, worst,
          fault_skip_norm ? "normalizer disabled by fault flag (failure expected)"
                          : "linear vs dense kernel path, tol 1e-10"};
}

SuiteResult check_normalization_ones(std::uint64_t seed, std::size_t instances,
                                     bool fault_skip_norm) {
  Rng rng(seed);
  double worst = 0.0;
  for (std::size_t t = 0; t < instances; ++t) {
    const std::size_t m = 1 + rng.pick(48);
    const std::size_t n = 1 + rng.pick(48);
    const std::size_t dq = 1 + rng.pick(12);
    const std::size_t dk = 1 + rng.pick(12);
    const std::size_t d = 1 + rng.pick(12);
    Matrix e_q(m, dq), e_k(n, dk), e_v(n, 1, 1.0);
    fill_uniform(e_q, rng, -1.0, 1.0);
    fill_uniform(e_k, rng, -1.0, 1.0);
    AttentionParams p = AttentionParams::init(dq, dk, 1, d, rng);
    p.w_v.value.fill(1.0);  // projected values become all-ones
    const KernelKind kf = t % 2 == 0 ? KernelKind::softplus : KernelKind::relu_eps;
    const AttentionOutput out =
        linear_attention_forward(e_q, e_k, e_v, p, kf, !fault_skip_norm);
    for (double v : out.output.flat()) worst = std::max(worst, std::fabs(v - 1.0));
  }
  return {"normalization_ones", worst <= 1e-12, worst,
          "all-ones values must map to all-ones output, tol 1e-12"};
}

SuiteResult check_weight_nonnegativity(std::uint64_t seed, std::size_t instances) {
  Rng rng(seed);
  double worst_neg = 0.0, worst_rowsum = 0.0;
  for (std::size_t t = 0; t < instances; ++t) {
    AttnInstance in = random_instance(rng, 48, 12);
    Matrix w;
    dense_kernel_attention_oracle(in.e_q, in.e_k, in.e_v, in.params, in.kernel, &w);
    for (std::size_t i = 0; i < w.rows(); ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < w.cols(); ++j) {
        worst_neg = std::max(worst_neg, -w(i, j));
        s += w(i, j);
      }
      worst_rowsum = std::max(worst_rowsum, std::fabs(s - 1.0));
    }
  }
  const double worst = std::max(worst_neg, worst_rowsum);
  return {"weight_nonnegativity", worst <= 1e-12, worst,
          "explicit weights >= 0 and row-stochastic, tol 1e-12"};
}

SuiteResult check_permutation_properties(std::uint64_t seed, std::size_t instances) {
  Rng rng(seed);
  double worst = 0.0;
  for (std::size_t t = 0; t < instances; ++t) {
    AttnInstance in = random_instance(rng, 32, 8);
    const Matrix base =
        linear_attention_forward(in.e_q, in.e_k, in.e_v, in.params, in.kernel).output;

    // Key/value permutation invariance.
    std::vector<std::size_t> perm(in.e_k.rows());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    rng.shuffle(perm);
    const Matrix pk = in.e_k.take_rows(perm);
    const Matrix pv = in.e_v.take_rows(perm);
    const Matrix shuffled =
        linear_attention_forward(in.e_q, pk, pv, in.params, in.kernel).output;
    worst = std::max(worst, max_scaled_rel_err(shuffled, base));

    // Query permutation equivariance.
    std::vector<std::size_t> qperm(in.e_q.rows());
    for (std::size_t i = 0; i < qperm.size(); ++i) qperm[i] = i;
    rng.shuffle(qperm);
    const Matrix pq = in.e_q.take_rows(qperm);
    const Matrix qout =
        linear_attention_forward(pq, in.e_k, in.e_v, in.params, in.kernel).output;
    const Matrix expected = base.take_rows(qperm);
    worst = std::max(worst, max_scaled_rel_err(qout, expected));
  }
  return {"permutation_properties", worst <= 1e-12, worst,
          "kv-permutation invariance, query equivariance, tol 1e-12"};
}

namespace {

// ---- finite-difference sub-checks ----

double fd_check_mlp(Rng& rng) {
  MlpTower tower = MlpTower::init(4, {5, 3}, rng);
  Matrix input(3, 4);
  fill_uniform(input, rng, -1.0, 1.0);
  Matrix cot(3, 1);
  fill_uniform(cot, rng, -1.0, 1.0);

  auto loss = [&]() {
    MlpCache c;
    const Matrix y = mlp_forward(tower, input, c);
    return hadamard(y, cot).sum();
  };

  ParamRefs refs;
  tower.collect("mlp", refs);
  zero_grads(refs);
  MlpCache cache;
  mlp_forward(tower, input, cache);
  const Matrix d_input = mlp_backward(tower, cot, cache);

  double worst = max_grad_rel_err(d_input, finite_difference(input, loss));
  for (auto& np : refs) {
    const Matrix fd = finite_difference(np.param->value, loss);
    worst = std::max(worst, max_grad_rel_err(np.param->grad, fd));
  }
  return worst;
}

double fd_check_linear_attention(Rng& rng, KernelKind kf, bool normalize) {
  const std::size_t m = 2, n = 3, dq = 3, dk = 2, dv = 3, d = 2;
  Matrix e_q(m, dq), e_k(n, dk), e_v(n, dv);
  fill_uniform(e_q, rng, -1.0, 1.0);
  fill_uniform(e_k, rng, -1.0, 1.0);
  fill_uniform(e_v, rng, -1.0, 1.0);
  AttentionParams p = AttentionParams::init(dq, dk, dv, d, rng);
  Matrix cot(m, d);
  fill_uniform(cot, rng, -1.0, 1.0);

  auto loss = [&]() {
    const AttentionOutput o = linear_attention_forward(e_q, e_k, e_v, p, kf, normalize);
    return hadamard(o.output, cot).sum();
  };

  AttentionOutput o = linear_attention_forward(e_q, e_k, e_v, p, kf, normalize);
  ParamRefs refs;
  p.collect("attn", refs);
  zero_grads(refs);
  const AttentionInputGrads g = linear_attention_backward(cot, o.cache, p);

  double worst = max_grad_rel_err(g.e_q, finite_difference(e_q, loss));
  worst = std::max(worst, max_grad_rel_err(g.e_k, finite_difference(e_k, loss)));
  worst = std::max(worst, max_grad_rel_err(g.e_v, finite_difference(e_v, loss)));
  for (auto& np : refs) {
    const Matrix fd = finite_difference(np.param->value, loss);
    worst = std::max(worst, max_grad_rel_err(np.param->grad, fd));
  }
  return worst;
}

double fd_check_dense_softmax(Rng& rng) {
  const std::size_t m = 3, n = 4, din = 3, d = 2;
  Matrix e_q(m, din), e_k(n, din), e_v(n, din);
  fill_uniform(e_q, rng, -1.0, 1.0);
  fill_uniform(e_k, rng, -1.0, 1.0);
  fill_uniform(e_v, rng, -1.0, 1.0);
  AttentionParams p = AttentionParams::init(din, din, din, d, rng);
  Matrix cot(m, d);
  fill_uniform(cot, rng, -1.0, 1.0);

  auto loss = [&]() {
    const Matrix o = dense_softmax_attention(e_q, e_k, e_v, p);
    return hadamard(o, cot).sum();
  };

  DenseSoftmaxCache cache;
  dense_softmax_attention(e_q, e_k, e_v, p, &cache);
  ParamRefs refs;
  p.collect("esu", refs);
  zero_grads(refs);
  const AttentionInputGrads g = dense_softmax_attention_backward(cot, cache, p);

  double worst = max_grad_rel_err(g.e_q, finite_difference(e_q, loss));
  worst = std::max(worst, max_grad_rel_err(g.e_k, finite_difference(e_k, loss)));
  worst = std::max(worst, max_grad_rel_err(g.e_v, finite_difference(e_v, loss)));
  for (auto& np : refs) {
    const Matrix fd = finite_difference(np.param->value, loss);
    worst = std::max(worst, max_grad_rel_err(np.param->grad, fd));
  }
  return worst;
}

double fd_check_esmm(Rng& rng) {
  const std::size_t m = 5;
  Matrix y_imp(m, 1), y_cli(m, 1);
  fill_uniform(y_imp, rng, 0.2, 0.8);
  fill_uniform(y_cli, rng, 0.2, 0.8);
  std::vector<CandidateItem> labels(m);
  labels[0].label_imp = 1;
  labels[0].label_cli = 1;
  labels[1].label_imp = 1;

  auto make_scored = [&]() {
    std::vector<ScoredCandidate> s(m);
    for (std::size_t i = 0; i < m; ++i) {
      s[i].y_imp = y_imp(i, 0);
      s[i].y_cli = y_cli(i, 0);
      s[i].pitctr = s[i].y_imp * s[i].y_cli;
    }
    return s;
  };
  const double lambda = 0.7;
  auto loss = [&]() {
    TowerGrads g;
    return esmm_loss(make_scored(), labels, lambda, g).total;
  };

  TowerGrads grads;
  esmm_loss(make_scored(), labels, lambda, grads);
  double worst = max_grad_rel_err(grads.d_imp, finite_difference(y_imp, loss));
  worst = std::max(worst, max_grad_rel_err(grads.d_cli, finite_difference(y_cli, loss)));
  return worst;
}

Request toy_request(Rng& rng, const ModelConfig& cfg, std::size_t m, std::size_t n) {
  Request req;
  req.user_feats = {static_cast<std::int32_t>(1 + rng.pick(cfg.user_vocab - 1))};
  for (std::size_t i = 0; i < m; ++i) {
    CandidateItem c;
    c.item_feats = {static_cast<std::int32_t>(1 + rng.pick(cfg.item_vocab - 1)),
                    static_cast<std::int32_t>(1 + rng.pick(cfg.cat_vocab - 1)),
                    static_cast<std::int32_t>(1 + rng.pick(cfg.topic_vocab - 1))};
    c.cross_feats = {static_cast<std::int32_t>(1 + rng.pick(cfg.cross_vocab - 1))};
    c.label_imp = i < m / 2 ? 1 : 0;
    c.label_cli = i == 0 ? 1 : 0;
    req.candidates.push_back(std::move(c));
  }
  for (std::size_t t = 0; t < n; ++t) {
    SeqItem s;
    s.item_feats = {static_cast<std::int32_t>(1 + rng.pick(cfg.item_vocab - 1)),
                    static_cast<std::int32_t>(1 + rng.pick(cfg.cat_vocab - 1)),
                    static_cast<std::int32_t>(1 + rng.pick(cfg.topic_vocab - 1))};
    s.category = s.item_feats[1];
    req.sequence.push_back(std::move(s));
  }
  return req;
}

ModelConfig toy_model_config(BaselineKind baseline) {
  ModelConfig cfg;
  cfg.user_vocab = 10;
  cfg.item_vocab = 20;
  cfg.cat_vocab = 5;
  cfg.topic_vocab = 5;
  cfg.cross_vocab = 17;
  cfg.e_user = 3;
  cfg.e_item = 3;
  cfg.e_cat = 2;
  cfg.e_topic = 2;
  cfg.e_cross = 3;
  cfg.attn_dim = 4;
  cfg.hidden = {6};
  cfg.top_k = 2;
  cfg.baseline = baseline;
  return cfg;
}

// Full-model check: analytic grads vs central differences of the total loss
// for `samples` randomly chosen parameter coordinates.
double fd_check_full_model(Rng& rng, BaselineKind baseline, std::size_t samples) {
  const ModelConfig cfg = toy_model_config(baseline);
  IfaModel model(cfg, rng.next_u64());
  const Request req = toy_request(rng, cfg, 4, 6);

  auto loss = [&]() {
    const auto scored = model.score(req);
    TowerGrads g;
    return esmm_loss(scored, req.candidates, 1.0, g).total;
  };

  ForwardCache fc;
  const auto scored = model.forward(req, fc);
  TowerGrads grads;
  esmm_loss(scored, req.candidates, 1.0, grads);
  ParamRefs refs = model.param_refs();
  zero_grads(refs);
  model.backward(grads.d_imp, grads.d_cli, fc);

  double worst = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    auto& np = refs[rng.pick(refs.size())];
    auto vals = np.param->value.flat();
    const std::size_t idx = rng.pick(vals.size());
    const double keep = vals[idx];
    const double h = 1e-5;
    vals[idx] = keep + h;
    const double fp = loss();
    vals[idx] = keep - h;
    const double fm = loss();
    vals[idx] = keep;
    const double fd = (fp - fm) / (2.0 * h);
    const double an = np.param->grad.flat()[idx];
    const double denom = std::max({std::fabs(an), std::fabs(fd), 1e-6});
    worst = std::max(worst, std::fabs(an - fd) / denom);
  }
  return worst;
}

}  // namespace

SuiteResult check_gradient_suite(std::uint64_t seed) {
  Rng rng(seed);
  double worst = 0.0;
  worst = std::max(worst, fd_check_mlp(rng));
  worst = std::max(worst, fd_check_linear_attention(rng, KernelKind::softplus, true));
  worst = std::max(worst, fd_check_linear_attention(rng, KernelKind::relu_eps, true));
  worst = std::max(worst, fd_check_linear_attention(rng, KernelKind::softplus, false));
  worst = std::max(worst, fd_check_dense_softmax(rng));
  worst = std::max(worst, fd_check_esmm(rng));
  worst = std::max(worst, fd_check_full_model(rng, BaselineKind::ifa, 20));
  worst = std::max(worst, fd_check_full_model(rng, BaselineKind::avgpool, 10));
  worst = std::max(worst, fd_check_full_model(rng, BaselineKind::din, 10));
  worst = std::max(worst, fd_check_full_model(rng, BaselineKind::sim_hard, 10));
  return {"gradient_finite_difference", worst <= 1e-5, worst,
          "mlp, attention (both kernels), dense softmax, loss, full models; tol 1e-5"};
}

SuiteResult check_auc_oracle(std::uint64_t seed, std::size_t instances, std::size_t max_items) {
  Rng rng(seed);
  double worst = 0.0;
  bool ok = true;
  for (std::size_t t = 0; t < instances; ++t) {
    const std::size_t n = 2 + rng.pick(max_items - 1);
    std::vector<double> scores(n);
    std::vector<std::uint8_t> labels(n);
    const double grid = static_cast<double>(1 + rng.pick(20));
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = std::round(rng.u01() * grid) / grid;  // induces ties
      labels[i] = rng.u01() < 0.4 ? 1 : 0;
    }
    labels[0] = 1;  // guarantee both classes
    labels[n - 1] = 0;
    const auto fast = auc(scores, labels);
    const auto slow = auc_pairwise(scores, labels);
    if (!fast || !slow || *fast != *slow) ok = false;
    if (fast && slow) worst = std::max(worst, std::fabs(*fast - *slow));
  }
  return {"auc_oracle", ok, worst, "rank-based equals pairwise enumeration exactly"};
}

StabilityProbe stability_probe(bool normalize, std::size_t n_small, std::size_t n_large,
                               std::uint64_t seed) {
  const std::size_t m = 32, din = 8, d = 16;
  Rng prm(seed);
  const AttentionParams params = AttentionParams::init(din, din, din, d, prm);

  auto mean_abs_at = [&](std::size_t n) {
    Rng rng(seed + n);
    Matrix e_q(m, din), e_k(n, din), e_v(n, din);
    fill_uniform(e_q, rng, 0.0, 1.0);
    fill_uniform(e_k, rng, 0.0, 1.0);
    fill_uniform(e_v, rng, 0.0, 1.0);
    return linear_attention_forward(e_q, e_k, e_v, params, KernelKind::softplus, normalize)
        .output.mean_abs();
  };

  StabilityProbe p;
  p.mean_abs_small = mean_abs_at(n_small);
  p.mean_abs_large = mean_abs_at(n_large);
  p.ratio = p.mean_abs_large / p.mean_abs_small;
  return p;
}

SuiteResult check_stability_normalization(std::uint64_t seed) {
  const StabilityProbe raw = stability_probe(false, 64, 4096, seed);
  const StabilityProbe norm = stability_probe(true, 64, 4096, seed);
  const bool pass = raw.ratio > 10.0 && norm.ratio <= 2.0;
  std::ostringstream note;
  note << "unnormalized growth x" << fmt(raw.ratio) << ", normalized x" << fmt(norm.ratio);
  return {"stability_normalization", pass, norm.ratio, note.str()};
}

std::vector<SuiteResult> run_selfcheck(const SelfCheckOptions& opt) {
  std::vector<SuiteResult> out;
  out.push_back(check_matmul_associativity(opt.seed, opt.associativity_trials));
  out.push_back(check_kernel_values());
  out.push_back(
      check_oracle_equivalence(opt.seed + 1, opt.equivalence_instances, opt.fault_skip_norm));
  out.push_back(check_normalization_ones(opt.seed + 2, opt.normalization_instances,
                                         opt.fault_skip_norm));
  out.push_back(check_weight_nonnegativity(opt.seed + 3, opt.normalization_instances));
  out.push_back(check_permutation_properties(opt.seed + 4, opt.permutation_instances));
  out.push_back(check_gradient_suite(opt.seed + 5));
  out.push_back(check_auc_oracle(opt.seed + 6, opt.auc_instances, 200));
  out.push_back(check_stability_normalization(opt.seed + 7));
  return out;
}

bool all_passed(const std::vector<SuiteResult>& results) {
  for (const auto& r : results) {
    if (!r.passed) return false;
  }
  return true;
}

}  // namespace ifa
