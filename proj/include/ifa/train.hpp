#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ifa/model.hpp"
#include "ifa/optimizer.hpp"

namespace ifa {

struct TrainConfig {
  double lr = 3e-3;
  OptKind optimizer = OptKind::adam;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double lambda_cli = 1.0;
  double lambda_extra = 1.0;
  std::size_t batch_requests = 1;
  std::size_t epochs = 3;
  double clip = 5.0;  // global gradient norm
  std::uint64_t seed = 1;
  std::size_t eval_cadence = 200;  // progressive-AUC logging interval, in steps
  std::size_t log_every = 25;
  double holdout_frac = 0.2;

  void validate() const;
};

struct EvalResult {
  std::optional<double> auc_imp;
  std::optional<double> auc_cli;
  std::optional<double> auc_extra;
  std::size_t requests = 0;
  std::size_t candidates = 0;
  std::size_t pos_imp = 0;
  std::size_t pos_cli = 0;
};

struct TrainStats {
  std::vector<double> loss_trace;  // total loss per optimizer step
  std::size_t steps = 0;
  std::optional<double> progressive_auc_imp;  // test-then-train, first epoch
  std::optional<double> progressive_auc_cli;
  EvalResult holdout;
};

// Candidate-scope evaluation: impression AUC scores by y_imp, action AUCs by
// the cascade product, with every candidate contributing a point.
EvalResult evaluate_model(const IfaModel& model, std::span<const Request> data);

// Streaming evaluate-then-train loop. Each batch is scored before the update
// (the scores feed the progressive AUC during the first epoch), then the
// batch gradient is norm-clipped and applied. Deterministic for a fixed
// (model seed, data order, config). If `log_path` is nonempty a key=value
// line per step is appended; if `ckpt_path` is nonempty a checkpoint is
// written at the end of every epoch.
TrainStats train_model(IfaModel& model, std::span<const Request> train_data,
                       std::span<const Request> holdout, const TrainConfig& cfg,
                       const std::string& log_path = "", const std::string& ckpt_path = "");

}  // namespace ifa
