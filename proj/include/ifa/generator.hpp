#pragma once

#include <cstdint>
#include <vector>

#include "ifa/request.hpp"
#include "ifa/rng.hpp"

namespace ifa {

// Synthetic request stream with three planted preference signals:
//   - same-category affinity (recoverable from a category hard search),
//   - cross-category topic affinity (invisible to a category hard search),
//   - a per-user profile term, target-independent, carried only by the
//     composition of the behaviour sequence.
// Every item carries a fixed (category, topic) pair; every user draws a
// preferred category, a preferred topic and a profile marker topic whose
// identity encodes the user's activity level.
struct GenConfig {
  std::size_t num_users = 20000;
  std::size_t num_items = 2000;
  std::size_t num_categories = 20;
  std::size_t num_topics = 10;
  std::size_t num_requests = 2500;
  std::size_t m = 64;    // candidate set size
  std::size_t n = 1024;  // behaviour sequence length

  double w_cat = 1.2;      // same-category affinity weight
  double w_topic = 1.2;    // cross-category topic affinity weight
  double w_profile = 0.8;  // user-profile term weight

  double temperature = 0.6;  // label temperature for the propensity sigmoid
  double offset = 1.1;       // propensity centering
  double noise_std = 0.25;   // per-pair propensity noise
  double explore_std = 0.05;  // exploration noise in impression selection
  std::size_t budget = 8;     // impressions per request

  // Sequence mixture shares: preferred category / preferred topic / profile
  // marker topic; the remainder is uniform.
  double p_cat = 0.25;
  double p_topic = 0.30;
  double p_profile = 0.25;
  double cand_relevant_frac = 0.5;  // candidates drawn from the user mixture

  std::size_t cross_vocab = 10007;
  std::size_t oracle_resamples = 128;  // Monte Carlo size for the ceiling scorer
  std::uint64_t seed = 42;

  void validate() const;
};

struct GeneratedRequest {
  Request req;
  std::vector<double> propensity;    // planted click propensity per candidate
  std::vector<double> oracle_score;  // P(imp) * propensity from full latent knowledge
};

class Generator {
 public:
  explicit Generator(GenConfig cfg);

  GeneratedRequest next();
  Request next_request() { return next().req; }

  std::vector<Request> take(std::size_t count);

  const GenConfig& config() const { return cfg_; }
  std::int32_t item_category(std::size_t item_id) const { return cat_[item_id]; }
  std::int32_t item_topic(std::size_t item_id) const { return topic_[item_id]; }

 private:
  std::size_t draw_item(std::int32_t gamma, std::int32_t tau, std::int32_t pi);
  std::size_t draw_from_pool(const std::vector<std::int32_t>& pool);

  GenConfig cfg_;
  Rng rng_;
  std::vector<std::int32_t> cat_, topic_;            // per item id, index 0 unused
  std::vector<std::vector<std::int32_t>> by_cat_;    // item pools, 1-based
  std::vector<std::vector<std::int32_t>> by_topic_;
};

}  // namespace ifa
