#include "ifa/embedding.hpp"

#include <cstring>

#include "ifa/errors.hpp"

namespace ifa {

EmbeddingTable EmbeddingTable::init(const std::string& field, std::size_t vocab, std::size_t dim,
                                    Rng& rng) {
  if (vocab == 0 || dim == 0) throw ConfigError("embedding '" + field + "': vocab and dim >= 1");
  EmbeddingTable t;
  t.field = field;
  t.vocab = vocab;
  t.dim = dim;
  t.table = GradPair(vocab, dim);
  fill_uniform(t.table.value, rng, -0.01, 0.01);
  return t;
}

void EmbeddingTable::check_id(std::int32_t id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= vocab)
    throw DataError("field '" + field + "': id " + std::to_string(id) +
                    " out of range [0, " + std::to_string(vocab) + ")");
}

void EmbeddingTable::lookup_into(std::int32_t id, double* dst) const {
  check_id(id);
  std::memcpy(dst, table.value.row_ptr(static_cast<std::size_t>(id)), dim * sizeof(double));
}

void EmbeddingTable::accumulate(std::int32_t id, const double* g) {
  check_id(id);
  double* row = table.grad.row_ptr(static_cast<std::size_t>(id));
  for (std::size_t j = 0; j < dim; ++j) row[j] += g[j];
}

}  // namespace ifa
