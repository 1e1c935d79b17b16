#include "ifa/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "ifa/errors.hpp"

namespace ifa {

std::optional<double> auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) throw UsageError("auc: scores/labels length mismatch");
  const std::size_t n = scores.size();
  std::size_t pos = 0;
  for (std::uint8_t l : labels) pos += (l != 0);
  const std::size_t neg = n - pos;
  if (pos == 0 || neg == 0) return std::nullopt;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&scores](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Average 1-based rank within each tie group; ranks are half-integers, so
  // the positive-rank sum is exact in double precision.
  double pos_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // (i+1 .. j) averaged
    for (std::size_t t = i; t < j; ++t) {
      if (labels[order[t]] != 0) pos_rank_sum += avg_rank;
    }
    i = j;
  }
  const double p = static_cast<double>(pos);
  return (pos_rank_sum - p * (p + 1.0) / 2.0) / (p * static_cast<double>(neg));
}

std::optional<double> auc_pairwise(std::span<const double> scores,
                                   std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) throw UsageError("auc: scores/labels length mismatch");
  double num = 0.0;
  std::size_t pos = 0, neg = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] == 0) continue;
    ++pos;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      if (scores[i] > scores[j]) {
        num += 1.0;
      } else if (scores[i] == scores[j]) {
        num += 0.5;
      }
    }
  }
  neg = scores.size() - pos;
  if (pos == 0 || neg == 0) return std::nullopt;
  return num / (static_cast<double>(pos) * static_cast<double>(neg));
}

std::size_t AucAccumulator::positives() const {
  std::size_t p = 0;
  for (std::uint8_t l : labels) p += (l != 0);
  return p;
}

std::optional<double> AucAccumulator::value() const { return auc(scores, labels); }

}  // namespace ifa
