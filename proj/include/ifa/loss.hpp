#pragma once

#include <span>
#include <vector>

#include "ifa/matrix.hpp"
#include "ifa/request.hpp"

namespace ifa {

// Entire-space two-tower loss over one candidate set. The impression tower
// is a plain binary cross-entropy; the click tower is trained on the product
// y_imp * y_cli so that its gradient reaches both towers.
struct LossReport {
  double l_imp = 0.0;
  double l_cli = 0.0;
  double l_extra = 0.0;
  double total = 0.0;
  std::size_t count_imp_pos = 0;
  std::size_t count_cli_pos = 0;
  std::size_t count_extra_pos = 0;
};

struct TowerGrads {
  Matrix d_imp;    // m x 1
  Matrix d_cli;    // m x 1
  Matrix d_extra;  // m x 1 (empty when the extra head is inactive)
};

// Probabilities are clamped to [kProbClamp, 1 - kProbClamp] before logs.
inline constexpr double kProbClamp = 1e-7;

// Negated mean log-likelihood, minimization form. `lambda_cli` weights the
// click term in `total`. When `reduction_count` is nonzero the mean is taken
// over that many candidates instead of the local count, which lets a
// multi-request batch behave as one concatenated candidate list.
// `with_extra` enables the optional third action head.
LossReport esmm_loss(std::span<const ScoredCandidate> scored,
                     std::span<const CandidateItem> labels, double lambda_cli,
                     TowerGrads& grads, std::size_t reduction_count = 0,
                     bool with_extra = false, double lambda_extra = 1.0);

}  // namespace ifa
