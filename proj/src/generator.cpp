#include "ifa/generator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ifa/errors.hpp"
#include "ifa/mlp.hpp"

namespace ifa {

void GenConfig::validate() const {
  if (num_users == 0 || num_items == 0 || num_categories == 0 || num_topics == 0)
    throw ConfigError("gen: vocab sizes must be >= 1");
  if (m < 2) throw ConfigError("gen: candidate size m must be >= 2");
  if (budget > m) throw ConfigError("gen: impression budget must be <= m");
  if (w_cat < 0.0 || w_topic < 0.0 || w_profile < 0.0)
    throw ConfigError("gen: signal weights must be >= 0");
  if (temperature <= 0.0) throw ConfigError("gen: temperature must be > 0");
  if (p_cat < 0.0 || p_topic < 0.0 || p_profile < 0.0 || p_cat + p_topic + p_profile > 1.0)
    throw ConfigError("gen: sequence mixture shares must be >= 0 and sum to <= 1");
  if (cand_relevant_frac < 0.0 || cand_relevant_frac > 1.0)
    throw ConfigError("gen: cand_relevant_frac must be in [0, 1]");
  if (cross_vocab == 0) throw ConfigError("gen: cross_vocab must be >= 1");
}

namespace {

// Stateless user-item mix for the cross-feature id.
std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

}  // namespace

Generator::Generator(GenConfig cfg) : cfg_(cfg), rng_(cfg.seed) {
  cfg_.validate();
  cat_.assign(cfg_.num_items + 1, 0);
  topic_.assign(cfg_.num_items + 1, 0);
  by_cat_.assign(cfg_.num_categories + 1, {});
  by_topic_.assign(cfg_.num_topics + 1, {});
  for (std::size_t i = 1; i <= cfg_.num_items; ++i) {
    cat_[i] = static_cast<std::int32_t>(1 + rng_.pick(cfg_.num_categories));
    topic_[i] = static_cast<std::int32_t>(1 + rng_.pick(cfg_.num_topics));
    by_cat_[cat_[i]].push_back(static_cast<std::int32_t>(i));
    by_topic_[topic_[i]].push_back(static_cast<std::int32_t>(i));
  }
}

std::size_t Generator::draw_from_pool(const std::vector<std::int32_t>& pool) {
  if (pool.empty()) return 1 + rng_.pick(cfg_.num_items);  // degenerate pool: uniform
  return static_cast<std::size_t>(pool[rng_.pick(pool.size())]);
}

std::size_t Generator::draw_item(std::int32_t gamma, std::int32_t tau, std::int32_t pi) {
  const double r = rng_.u01();
  if (r < cfg_.p_cat) return draw_from_pool(by_cat_[gamma]);
  if (r < cfg_.p_cat + cfg_.p_topic) return draw_from_pool(by_topic_[tau]);
  if (r < cfg_.p_cat + cfg_.p_topic + cfg_.p_profile) return draw_from_pool(by_topic_[pi]);
  return 1 + rng_.pick(cfg_.num_items);
}

GeneratedRequest Generator::next() {
  const std::int32_t user_id = static_cast<std::int32_t>(1 + rng_.pick(cfg_.num_users));
  const std::int32_t gamma = static_cast<std::int32_t>(1 + rng_.pick(cfg_.num_categories));
  const std::int32_t tau = static_cast<std::int32_t>(1 + rng_.pick(cfg_.num_topics));
  const std::int32_t pi = static_cast<std::int32_t>(1 + rng_.pick(cfg_.num_topics));
  const double a_u = cfg_.num_topics > 1
                         ? -1.0 + 2.0 * static_cast<double>(pi - 1) /
                                      static_cast<double>(cfg_.num_topics - 1)
                         : 0.0;

  GeneratedRequest out;
  Request& req = out.req;
  req.user_feats = {user_id};

  req.sequence.reserve(cfg_.n);
  for (std::size_t t = 0; t < cfg_.n; ++t) {
    const std::size_t item = draw_item(gamma, tau, pi);
    SeqItem si;
    si.item_feats = {static_cast<std::int32_t>(item), cat_[item], topic_[item]};
    si.category = cat_[item];
    req.sequence.push_back(std::move(si));
  }

  // Candidate pool: a slice from the user's own mixture plus uniform noise,
  // shuffled so position carries nothing.
  std::vector<std::size_t> cand_items(cfg_.m);
  const std::size_t n_rel = static_cast<std::size_t>(
      std::llround(cfg_.cand_relevant_frac * static_cast<double>(cfg_.m)));
  for (std::size_t i = 0; i < cfg_.m; ++i) {
    cand_items[i] = i < n_rel ? draw_item(gamma, tau, pi) : 1 + rng_.pick(cfg_.num_items);
  }
  rng_.shuffle(cand_items);

  out.propensity.resize(cfg_.m);
  req.candidates.resize(cfg_.m);
  for (std::size_t i = 0; i < cfg_.m; ++i) {
    const std::size_t item = cand_items[i];
    CandidateItem& c = req.candidates[i];
    c.item_feats = {static_cast<std::int32_t>(item), cat_[item], topic_[item]};
    const std::uint64_t h =
        mix64((static_cast<std::uint64_t>(user_id) << 32) ^ static_cast<std::uint64_t>(item));
    c.cross_feats = {static_cast<std::int32_t>(1 + h % cfg_.cross_vocab)};

    const double catm = cat_[item] == gamma ? 1.0 : 0.0;
    const double topm = topic_[item] == tau ? 1.0 : 0.0;
    const double score = cfg_.w_cat * catm + cfg_.w_topic * topm + cfg_.w_profile * a_u +
                         cfg_.noise_std * rng_.normal();
    out.propensity[i] = sigmoid((score - cfg_.offset) / cfg_.temperature);
  }

  // Impressions: top-budget by propensity plus exploration noise.
  std::vector<double> ranked(cfg_.m);
  for (std::size_t i = 0; i < cfg_.m; ++i)
    ranked[i] = out.propensity[i] + cfg_.explore_std * rng_.normal();
  std::vector<std::size_t> order(cfg_.m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&ranked](std::size_t a, std::size_t b) { return ranked[a] > ranked[b]; });
  for (std::size_t r = 0; r < cfg_.budget; ++r) req.candidates[order[r]].label_imp = 1;

  for (std::size_t i = 0; i < cfg_.m; ++i) {
    if (req.candidates[i].label_imp == 1 && rng_.u01() < out.propensity[i])
      req.candidates[i].label_cli = 1;
  }

  // Ceiling scorer: exact propensity times a Monte Carlo estimate of the
  // impression probability under the generator's own exploration model.
  out.oracle_score.assign(cfg_.m, 0.0);
  if (cfg_.oracle_resamples > 0) {
    std::vector<double> noisy(cfg_.m);
    std::vector<std::size_t> ord(cfg_.m);
    for (std::size_t rep = 0; rep < cfg_.oracle_resamples; ++rep) {
      for (std::size_t i = 0; i < cfg_.m; ++i)
        noisy[i] = out.propensity[i] + cfg_.explore_std * rng_.normal();
      std::iota(ord.begin(), ord.end(), 0);
      std::nth_element(ord.begin(), ord.begin() + static_cast<std::ptrdiff_t>(cfg_.budget) - 1,
                       ord.end(),
                       [&noisy](std::size_t a, std::size_t b) { return noisy[a] > noisy[b]; });
      for (std::size_t r = 0; r < cfg_.budget; ++r) out.oracle_score[ord[r]] += 1.0;
    }
    for (std::size_t i = 0; i < cfg_.m; ++i) {
      out.oracle_score[i] =
          out.oracle_score[i] / static_cast<double>(cfg_.oracle_resamples) * out.propensity[i];
    }
  }
  return out;
}

std::vector<Request> Generator::take(std::size_t count) {
  std::vector<Request> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(next().req);
  return out;
}

}  // namespace ifa
