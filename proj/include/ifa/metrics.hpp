#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace ifa {

// Probability that a random positive outranks a random negative; ties count
// one half. Rank-based, O(n log n). Returns nullopt when only one class is
// present (the value is undefined, not zero).
std::optional<double> auc(std::span<const double> scores, std::span<const std::uint8_t> labels);

// Brute-force pairwise enumeration, O(P*N). Reference implementation for the
// rank-based path; the two agree exactly because both numerators are sums of
// halves, which doubles represent without rounding at these sizes.
std::optional<double> auc_pairwise(std::span<const double> scores,
                                   std::span<const std::uint8_t> labels);

// Streaming (score, label) collector for candidate-scope evaluation.
struct AucAccumulator {
  std::vector<double> scores;
  std::vector<std::uint8_t> labels;

  void add(double score, std::uint8_t label) {
    scores.push_back(score);
    labels.push_back(label);
  }
  std::size_t positives() const;
  std::optional<double> value() const;
};

}  // namespace ifa
