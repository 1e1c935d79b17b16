#include "ifa/train.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "ifa/checkpoint.hpp"
#include "ifa/errors.hpp"
#include "ifa/loss.hpp"
#include "ifa/metrics.hpp"

namespace ifa {

void TrainConfig::validate() const {
  if (lr < 0.0) throw ConfigError("train: lr must be >= 0");
  if (clip <= 0.0) throw ConfigError("train: clip must be > 0");
  if (batch_requests == 0) throw ConfigError("train: batch_requests must be >= 1");
  if (epochs == 0) throw ConfigError("train: epochs must be >= 1");
  if (lambda_cli < 0.0 || lambda_extra < 0.0)
    throw ConfigError("train: loss weights must be >= 0");
}

EvalResult evaluate_model(const IfaModel& model, std::span<const Request> data) {
  AucAccumulator imp, cli, extra;
  EvalResult out;
  const bool has_extra = model.config().extra_head;
  for (const Request& req : data) {
    const auto scored = model.score(req);
    for (std::size_t i = 0; i < scored.size(); ++i) {
      imp.add(scored[i].y_imp, req.candidates[i].label_imp);
      cli.add(scored[i].pitctr, req.candidates[i].label_cli);
      if (has_extra && req.has_extra_labels)
        extra.add(scored[i].pitctr_extra, req.candidates[i].label_extra);
    }
    ++out.requests;
    out.candidates += scored.size();
  }
  out.pos_imp = imp.positives();
  out.pos_cli = cli.positives();
  out.auc_imp = imp.value();
  out.auc_cli = cli.value();
  out.auc_extra = extra.value();
  return out;
}

namespace {

std::string fmt_opt(const std::optional<double>& v) {
  if (!v) return "na";
  std::ostringstream os;
  os.precision(6);
  os << *v;
  return os.str();
}

}  // namespace

TrainStats train_model(IfaModel& model, std::span<const Request> train_data,
                       std::span<const Request> holdout, const TrainConfig& cfg,
                       const std::string& log_path, const std::string& ckpt_path) {
  cfg.validate();
  if (train_data.empty()) throw UsageError("train: empty training stream");

  std::ofstream log;
  if (!log_path.empty()) {
    log.open(log_path, std::ios::app);
    if (!log) throw IoError("train: cannot open log '" + log_path + "'");
  }

  ParamRefs refs = model.param_refs();
  Optimizer opt(cfg.optimizer, cfg.lr, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps);
  const bool with_extra = model.config().extra_head;

  TrainStats stats;
  AucAccumulator prog_imp, prog_cli;  // progressive validation, first epoch only

  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::size_t at = 0;
    while (at < train_data.size()) {
      const std::size_t batch_end = std::min(at + cfg.batch_requests, train_data.size());

      // Pass 1: evaluate (scores recorded before any update touches params).
      std::vector<ForwardCache> caches(batch_end - at);
      std::size_t total_cands = 0;
      for (std::size_t r = at; r < batch_end; ++r) {
        const auto scored = model.forward(train_data[r], caches[r - at]);
        total_cands += scored.size();
        if (epoch == 0) {
          for (std::size_t i = 0; i < scored.size(); ++i) {
            prog_imp.add(scored[i].y_imp, train_data[r].candidates[i].label_imp);
            prog_cli.add(scored[i].pitctr, train_data[r].candidates[i].label_cli);
          }
        }
      }

      // Pass 2: loss over the concatenated batch, then train.
      double batch_limp = 0.0, batch_lcli = 0.0, batch_total = 0.0;
      for (std::size_t r = at; r < batch_end; ++r) {
        ForwardCache& fc = caches[r - at];
        TowerGrads grads;
        const LossReport rep =
            esmm_loss(fc.scored, train_data[r].candidates, cfg.lambda_cli, grads, total_cands,
                      with_extra && train_data[r].has_extra_labels, cfg.lambda_extra);
        batch_limp += rep.l_imp;
        batch_lcli += rep.l_cli;
        batch_total += rep.total;
        model.backward(grads.d_imp, grads.d_cli, grads.d_extra, fc);
      }

      if (!std::isfinite(batch_total)) {
        const std::string note =
            ckpt_path.empty() ? "no checkpoint written"
                              : "last good checkpoint: '" + ckpt_path + "' (end of epoch " +
                                    (epoch == 0 ? std::string("none") : std::to_string(epoch - 1)) +
                                    ")";
        throw TrainingError("non-finite loss at step " + std::to_string(step + 1) + "; " + note);
      }

      const double gnorm = global_grad_norm(refs);
      if (gnorm > cfg.clip && gnorm > 0.0) scale_grads(refs, cfg.clip / gnorm);
      opt.step(refs);
      ++step;
      stats.loss_trace.push_back(batch_total);

      if (log && (step % cfg.log_every == 0 || step == 1)) {
        log << "step=" << step << " epoch=" << epoch << " l_imp=" << batch_limp
            << " l_cli=" << batch_lcli << " total=" << batch_total << " grad_norm=" << gnorm;
        if (epoch == 0 && cfg.eval_cadence > 0 && step % cfg.eval_cadence == 0) {
          log << " auc_imp=" << fmt_opt(prog_imp.value())
              << " auc_cli=" << fmt_opt(prog_cli.value());
        }
        log << "\n";
      }
      at = batch_end;
    }
    if (!ckpt_path.empty()) save_checkpoint(ckpt_path, model, step);
  }

  stats.steps = step;
  stats.progressive_auc_imp = prog_imp.value();
  stats.progressive_auc_cli = prog_cli.value();
  if (!holdout.empty()) {
    stats.holdout = evaluate_model(model, holdout);
    if (log) {
      log << "holdout auc_imp=" << fmt_opt(stats.holdout.auc_imp)
          << " auc_cli=" << fmt_opt(stats.holdout.auc_cli)
          << " requests=" << stats.holdout.requests << "\n";
    }
  }
  return stats;
}

}  // namespace ifa
