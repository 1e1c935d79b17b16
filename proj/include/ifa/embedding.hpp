#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "ifa/grad.hpp"
#include "ifa/matrix.hpp"
#include "ifa/rng.hpp"

namespace ifa {

// Trainable lookup table. Id 0 is reserved as the padding/unknown row; ids at
// or above `vocab` raise a DataError naming the offending field.
struct EmbeddingTable {
  std::string field;
  std::size_t vocab = 0;
  std::size_t dim = 0;
  GradPair table;

  static EmbeddingTable init(const std::string& field, std::size_t vocab, std::size_t dim,
                             Rng& rng);

  void check_id(std::int32_t id) const;
  // Copies the row for `id` into dst (length dim).
  void lookup_into(std::int32_t id, double* dst) const;
  // Accumulates a gradient row for `id`.
  void accumulate(std::int32_t id, const double* g);
};

}  // namespace ifa
