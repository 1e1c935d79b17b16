#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ifa/bench.hpp"
#include "ifa/checkpoint.hpp"
#include "ifa/config.hpp"
#include "ifa/dataset.hpp"
#include "ifa/errors.hpp"
#include "ifa/generator.hpp"
#include "ifa/metrics.hpp"
#include "ifa/model.hpp"
#include "ifa/selfcheck.hpp"
#include "ifa/train.hpp"

namespace {

using namespace ifa;

// Exit codes: 0 success, 1 property/training failure, 2 usage, 3 io.
constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

int guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  } catch (const DataError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  } catch (const IfaError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitFailure;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitFailure;
  }
}

KvConfig load_config(const std::string& path, const std::vector<std::string>& sets) {
  KvConfig cfg = path.empty() ? KvConfig{} : KvConfig::parse_file(path);
  for (const std::string& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw UsageError("--set expects section.key=value, got '" + s + "'");
    cfg.set(s.substr(0, eq), s.substr(eq + 1));
  }
  cfg.check_known();
  return cfg;
}

std::string fmt_auc(const std::optional<double>& v) {
  if (!v) return "na";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", *v);
  return buf;
}

struct GenerateArgs {
  std::string config, out, eval_out;
  double eval_frac = 0.2;
  std::int64_t seed = -1;
  std::int64_t requests = -1;
  std::vector<std::string> sets;
};

int cmd_generate(const GenerateArgs& a) {
  KvConfig cfg = load_config(a.config, a.sets);
  GenConfig g = gen_config_from(cfg);
  if (a.seed >= 0) g.seed = static_cast<std::uint64_t>(a.seed);
  if (a.requests >= 0) g.num_requests = static_cast<std::size_t>(a.requests);

  Generator gen(g);
  std::size_t n_eval = 0;
  if (!a.eval_out.empty()) {
    if (a.eval_frac < 0.0 || a.eval_frac >= 1.0)
      throw UsageError("--eval-frac must be in [0, 1)");
    n_eval = static_cast<std::size_t>(std::llround(
        static_cast<double>(g.num_requests) * a.eval_frac));
  }
  const std::size_t n_train = g.num_requests - n_eval;

  std::size_t imps = 0, clis = 0, cands = 0;
  auto emit = [&](std::ostream& os, std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) {
      const Request req = gen.next_request();
      for (const CandidateItem& c : req.candidates) {
        ++cands;
        imps += c.label_imp;
        clis += c.label_cli;
      }
      append_dataset(os, req);
    }
  };

  {
    std::ofstream os(a.out, std::ios::trunc);
    if (!os) throw IoError("cannot open '" + a.out + "' for writing");
    emit(os, n_train);
  }
  if (n_eval > 0) {
    std::ofstream os(a.eval_out, std::ios::trunc);
    if (!os) throw IoError("cannot open '" + a.eval_out + "' for writing");
    emit(os, n_eval);
  }
  std::printf("wrote %zu requests to %s", n_train, a.out.c_str());
  if (n_eval > 0) std::printf(" and %zu to %s", n_eval, a.eval_out.c_str());
  std::printf("\ncandidates=%zu impressions=%zu clicks=%zu (imp rate %.3f, cli rate %.3f)\n",
              cands, imps, clis, static_cast<double>(imps) / static_cast<double>(cands),
              static_cast<double>(clis) / static_cast<double>(cands));
  return kExitOk;
}

struct TrainArgs {
  std::string config, data, ckpt, log;
  std::vector<std::string> sets;
};

int cmd_train(const TrainArgs& a) {
  KvConfig cfg = load_config(a.config, a.sets);
  const ModelConfig mc = model_config_from(cfg);
  const TrainConfig tc = train_config_from(cfg);
  const std::uint64_t model_seed = cfg.get_u64("model.seed", static_cast<std::size_t>(tc.seed));

  const std::vector<Request> data = read_dataset(a.data);
  if (data.empty()) throw DataError("dataset '" + a.data + "' is empty");
  const std::size_t n_hold = static_cast<std::size_t>(
      std::llround(static_cast<double>(data.size()) * tc.holdout_frac));
  if (n_hold >= data.size()) throw ConfigError("train.holdout_frac leaves no training data");
  const std::span<const Request> train_span(data.data(), data.size() - n_hold);
  const std::span<const Request> hold_span(data.data() + data.size() - n_hold, n_hold);

  IfaModel model(mc, model_seed);
  const TrainStats stats = train_model(model, train_span, hold_span, tc, a.log, a.ckpt);

  std::printf("trained %s: steps=%zu final_loss=%.5f\n", baseline_name(mc.baseline),
              stats.steps, stats.loss_trace.empty() ? 0.0 : stats.loss_trace.back());
  std::printf("progressive auc_imp=%s auc_cli=%s\n",
              fmt_auc(stats.progressive_auc_imp).c_str(),
              fmt_auc(stats.progressive_auc_cli).c_str());
  if (n_hold > 0) {
    std::printf("holdout auc_imp=%s auc_cli=%s (requests=%zu)\n",
                fmt_auc(stats.holdout.auc_imp).c_str(), fmt_auc(stats.holdout.auc_cli).c_str(),
                stats.holdout.requests);
  }
  std::printf("checkpoint written to %s\n", a.ckpt.c_str());
  return kExitOk;
}

struct EvalArgs {
  std::string ckpt, data;
};

int cmd_eval(const EvalArgs& a) {
  LoadedCheckpoint lc = load_checkpoint(a.ckpt);
  const std::vector<Request> data = read_dataset(a.data);
  if (data.empty()) throw DataError("dataset '" + a.data + "' is empty");
  const EvalResult r = evaluate_model(*lc.model, data);
  std::printf("model=%s step=%llu auc_imp=%s auc_cli=%s%s%s\n",
              baseline_name(lc.model->config().baseline),
              static_cast<unsigned long long>(lc.step), fmt_auc(r.auc_imp).c_str(),
              fmt_auc(r.auc_cli).c_str(), r.auc_extra ? " auc_extra=" : "",
              r.auc_extra ? fmt_auc(r.auc_extra).c_str() : "");
  std::printf("requests=%zu candidates=%zu pos_imp=%zu pos_cli=%zu\n", r.requests,
              r.candidates, r.pos_imp, r.pos_cli);
  return kExitOk;
}

struct AblateArgs {
  std::string config, data;
  std::vector<std::string> sets;
};

int cmd_ablate(const AblateArgs& a) {
  KvConfig cfg = load_config(a.config, a.sets);
  ModelConfig mc = model_config_from(cfg);
  const TrainConfig tc = train_config_from(cfg);
  const std::uint64_t model_seed = cfg.get_u64("model.seed", static_cast<std::size_t>(tc.seed));
  mc.baseline = BaselineKind::ifa;

  const std::vector<Request> data = read_dataset(a.data);
  const std::size_t n_hold = static_cast<std::size_t>(
      std::llround(static_cast<double>(data.size()) * tc.holdout_frac));
  if (n_hold == 0 || n_hold >= data.size())
    throw ConfigError("ablate: train.holdout_frac must leave both train and holdout data");
  const std::span<const Request> train_span(data.data(), data.size() - n_hold);
  const std::span<const Request> hold_span(data.data() + data.size() - n_hold, n_hold);

  struct Variant {
    const char* name;
    bool use_fsm, use_ram;
  };
  const Variant variants[3] = {
      {"ifa", true, true}, {"ifa-ram", true, false}, {"ifa-fsm-ram", false, false}};

  std::printf("%-14s %10s %10s\n", "model", "auc_imp", "auc_cli");
  for (const Variant& v : variants) {
    ModelConfig vc = mc;
    vc.use_fsm = v.use_fsm;
    vc.use_ram = v.use_ram;
    IfaModel model(vc, model_seed);
    const TrainStats stats = train_model(model, train_span, hold_span, tc);
    std::printf("%-14s %10s %10s\n", v.name, fmt_auc(stats.holdout.auc_imp).c_str(),
                fmt_auc(stats.holdout.auc_cli).c_str());
  }
  return kExitOk;
}

struct CheckArgs {
  std::string fault;
  std::size_t instances = 0;
  std::uint64_t seed = 12345;
};

int cmd_check(const CheckArgs& a) {
  SelfCheckOptions opt;
  opt.seed = a.seed;
  if (!a.fault.empty()) {
    if (a.fault != "skip_norm")
      throw UsageError("unknown fault mode '" + a.fault + "' (expected skip_norm)");
    opt.fault_skip_norm = true;
  }
  if (a.instances > 0) {
    opt.equivalence_instances = a.instances;
    opt.normalization_instances = a.instances;
    opt.auc_instances = a.instances;
  }
  const auto results = run_selfcheck(opt);
  std::printf("%-28s %-6s %-12s %s\n", "suite", "status", "max_err", "note");
  for (const SuiteResult& r : results) {
    std::printf("%-28s %-6s %-12.3e %s\n", r.name.c_str(), r.passed ? "pass" : "FAIL",
                r.max_err, r.note.c_str());
  }
  return all_passed(results) ? kExitOk : kExitFailure;
}

struct BenchArgs {
  std::string kind = "linear";
  std::string sweep = "square";
  std::string grid = "256:16384:2";
  std::string out;
  std::size_t fixed_m = 1024;
  std::size_t dim = 32;
  std::size_t reps = 5;
  std::uint64_t seed = 99;
};

int cmd_bench(const BenchArgs& a) {
  BenchSpec spec;
  if (a.kind == "linear") {
    spec.kind = BenchKind::linear;
  } else if (a.kind == "dense") {
    spec.kind = BenchKind::dense;
  } else {
    throw UsageError("--kind must be linear|dense");
  }
  if (a.sweep == "square") {
    spec.sweep = SweepMode::square;
  } else if (a.sweep == "fixed_m") {
    spec.sweep = SweepMode::fixed_m;
  } else {
    throw UsageError("--sweep must be square|fixed_m");
  }
  unsigned long lo = 0, hi = 0;
  double factor = 0.0;
  if (std::sscanf(a.grid.c_str(), "%lu:%lu:%lf", &lo, &hi, &factor) != 3)
    throw UsageError("--grid expects MIN:MAX:FACTOR, e.g. 256:16384:2");
  spec.s_min = lo;
  spec.s_max = hi;
  spec.factor = factor;
  spec.fixed_m = a.fixed_m;
  spec.dim = a.dim;
  spec.d_in = a.dim;
  spec.reps = a.reps;
  spec.seed = a.seed;

  const BenchResult result = run_bench(spec);
  std::printf("%-8s %-8s %-8s %-12s %-12s %s\n", "m", "n", "kind", "mean_s", "std_s", "reps");
  for (const BenchCell& c : result.cells) {
    if (c.skipped) {
      std::printf("%-8zu %-8zu %-8s skipped: %s\n", c.m, c.n, c.kind.c_str(), c.note.c_str());
    } else {
      std::printf("%-8zu %-8zu %-8s %-12.6f %-12.6f %zu\n", c.m, c.n, c.kind.c_str(), c.mean_s,
                  c.std_s, c.reps);
    }
  }
  if (result.slope) std::printf("loglog_slope=%.4f\n", *result.slope);
  if (!a.out.empty()) {
    write_bench_jsonl(a.out, result);
    std::printf("wrote %s\n", a.out.c_str());
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ifa: linear-attention candidate-set ranker over full behaviour sequences"};
  app.require_subcommand(1);

  GenerateArgs ga;
  auto* gen = app.add_subcommand("generate", "write a synthetic dataset");
  gen->add_option("--config", ga.config, "key=value config file");
  gen->add_option("--out", ga.out, "output dataset path")->required();
  gen->add_option("--eval-out", ga.eval_out, "held-out dataset path (optional)");
  gen->add_option("--eval-frac", ga.eval_frac, "fraction routed to --eval-out");
  gen->add_option("--seed", ga.seed, "override gen.seed");
  gen->add_option("--requests", ga.requests, "override gen.num_requests");
  gen->add_option("--set", ga.sets, "override any config key (section.key=value)");

  TrainArgs ta;
  auto* tr = app.add_subcommand("train", "train a model on a dataset");
  tr->add_option("--config", ta.config, "key=value config file");
  tr->add_option("--data", ta.data, "training dataset")->required();
  tr->add_option("--ckpt", ta.ckpt, "checkpoint output path")->required();
  tr->add_option("--log", ta.log, "training log path (key=value lines)");
  tr->add_option("--set", ta.sets, "override any config key (section.key=value)");

  EvalArgs ea;
  auto* ev = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
  ev->add_option("--ckpt", ea.ckpt, "checkpoint path")->required();
  ev->add_option("--data", ea.data, "evaluation dataset")->required();

  AblateArgs aa;
  auto* ab = app.add_subcommand("ablate", "train/evaluate the three ablation variants");
  ab->add_option("--config", aa.config, "key=value config file");
  ab->add_option("--data", aa.data, "dataset (split per train.holdout_frac)")->required();
  ab->add_option("--set", aa.sets, "override any config key (section.key=value)");

  CheckArgs ca;
  auto* ch = app.add_subcommand("check", "run the property suites");
  ch->add_option("--fault", ca.fault, "inject a fault (skip_norm) as a negative control");
  ch->add_option("--instances", ca.instances, "override per-suite instance counts");
  ch->add_option("--seed", ca.seed, "suite seed");

  BenchArgs ba;
  auto* be = app.add_subcommand("bench", "time attention forwards over a size grid");
  be->add_option("--kind", ba.kind, "linear|dense");
  be->add_option("--sweep", ba.sweep, "square|fixed_m");
  be->add_option("--grid", ba.grid, "MIN:MAX:FACTOR");
  be->add_option("--m", ba.fixed_m, "query count for fixed_m sweep");
  be->add_option("--dim", ba.dim, "attention inner dim");
  be->add_option("--reps", ba.reps, "timed repetitions (>= 5)");
  be->add_option("--seed", ba.seed, "input seed");
  be->add_option("--out", ba.out, "write per-cell jsonl records here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  if (gen->parsed()) return guarded([&] { return cmd_generate(ga); });
  if (tr->parsed()) return guarded([&] { return cmd_train(ta); });
  if (ev->parsed()) return guarded([&] { return cmd_eval(ea); });
  if (ab->parsed()) return guarded([&] { return cmd_ablate(aa); });
  if (ch->parsed()) return guarded([&] { return cmd_check(ca); });
  if (be->parsed()) return guarded([&] { return cmd_bench(ba); });
  return kExitUsage;
}
