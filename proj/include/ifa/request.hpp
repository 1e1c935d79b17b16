#pragma once

#include <cstdint>
#include <vector>

namespace ifa {

// One candidate item: its categorical feature ids, the user-item cross
// feature ids, and the observed outcome labels.
struct CandidateItem {
  std::vector<std::int32_t> item_feats;
  std::vector<std::int32_t> cross_feats;
  std::uint8_t label_imp = 0;
  std::uint8_t label_cli = 0;
  std::uint8_t label_extra = 0;  // optional extra action head (e.g. long view)
};

struct SeqItem {
  std::vector<std::int32_t> item_feats;
  std::int32_t category = 0;  // hard-search key, duplicated from the feature slot
};

// One training/serving unit: a user, the candidate set to score, and the
// full-length behaviour sequence. Immutable after parse/generation.
struct Request {
  std::vector<std::int32_t> user_feats;
  std::vector<CandidateItem> candidates;
  std::vector<SeqItem> sequence;
  bool has_extra_labels = false;

  std::size_t num_candidates() const { return candidates.size(); }
  std::size_t sequence_len() const { return sequence.size(); }

  // Throws DataError on label inconsistency or an empty candidate set.
  void validate() const;
};

// Per-item predictions aligned to the candidate set. pitctr is the serving
// score: p(action | candidate) = p(imp | candidate) * p(action | imp).
struct ScoredCandidate {
  double y_imp = 0.0;
  double y_cli = 0.0;
  double pitctr = 0.0;
  double y_extra = 0.0;
  double pitctr_extra = 0.0;
};

}  // namespace ifa
