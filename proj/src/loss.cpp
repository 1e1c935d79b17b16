#include "ifa/loss.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ifa/errors.hpp"

namespace ifa {

namespace {

double clamp_prob(double p) { return std::clamp(p, kProbClamp, 1.0 - kProbClamp); }

// Adds the BCE term for (p_raw, label) to `loss` and returns dL/dp_raw,
// where p_raw is clamped before the log. Outside the clamp the derivative
// is zero. `scale` is the 1/mean factor.
double bce_term(double p_raw, int label, double scale, double& loss) {
  const double p = clamp_prob(p_raw);
  loss += -(label ? std::log(p) : std::log1p(-p)) * scale;
  if (p_raw < kProbClamp || p_raw > 1.0 - kProbClamp) return 0.0;
  // d/dp of -(l ln p + (1-l) ln(1-p)) = (p - l) / (p (1 - p))
  return scale * (p - static_cast<double>(label)) / (p * (1.0 - p));
}

}  // namespace

LossReport esmm_loss(std::span<const ScoredCandidate> scored,
                     std::span<const CandidateItem> labels, double lambda_cli,
                     TowerGrads& grads, std::size_t reduction_count, bool with_extra,
                     double lambda_extra) {
  const std::size_t m = scored.size();
  if (m == 0 || labels.size() != m)
    throw UsageError("esmm_loss: scored/label lengths differ or are empty");
  for (std::size_t i = 0; i < m; ++i) {
    if (labels[i].label_cli == 1 && labels[i].label_imp == 0)
      throw DataError("candidate " + std::to_string(i) + ": click without impression");
    if (with_extra && labels[i].label_extra == 1 && labels[i].label_imp == 0)
      throw DataError("candidate " + std::to_string(i) + ": extra action without impression");
  }

  const double scale =
      1.0 / static_cast<double>(reduction_count == 0 ? m : reduction_count);

  LossReport rep;
  grads.d_imp = Matrix(m, 1, 0.0);
  grads.d_cli = Matrix(m, 1, 0.0);
  grads.d_extra = with_extra ? Matrix(m, 1, 0.0) : Matrix();

  for (std::size_t i = 0; i < m; ++i) {
    const int l_imp = labels[i].label_imp;
    const int l_cli = labels[i].label_cli;
    rep.count_imp_pos += static_cast<std::size_t>(l_imp);
    rep.count_cli_pos += static_cast<std::size_t>(l_cli);

    const double y_imp = scored[i].y_imp;
    const double y_cli = scored[i].y_cli;

    double d_imp = bce_term(y_imp, l_imp, scale, rep.l_imp);

    // Click term on the cascade product; the chain rule splits the product
    // gradient across both towers.
    const double q = y_imp * y_cli;
    double l_cli_loss = 0.0;
    const double d_q = bce_term(q, l_cli, scale, l_cli_loss);
    rep.l_cli += l_cli_loss;
    d_imp += lambda_cli * d_q * y_cli;
    grads.d_cli(i, 0) = lambda_cli * d_q * y_imp;

    if (with_extra) {
      rep.count_extra_pos += static_cast<std::size_t>(labels[i].label_extra);
      const double y_x = scored[i].y_extra;
      const double qx = y_imp * y_x;
      double l_x = 0.0;
      const double d_qx = bce_term(qx, labels[i].label_extra, scale, l_x);
      rep.l_extra += l_x;
      d_imp += lambda_extra * d_qx * y_x;
      grads.d_extra(i, 0) = lambda_extra * d_qx * y_imp;
    }

    grads.d_imp(i, 0) = d_imp;
  }

  rep.total = rep.l_imp + lambda_cli * rep.l_cli + (with_extra ? lambda_extra * rep.l_extra : 0.0);
  return rep;
}

}  // namespace ifa
