#include "ifa/request.hpp"

#include <string>

#include "ifa/errors.hpp"

namespace ifa {

void Request::validate() const {
  if (candidates.empty()) throw DataError("request has an empty candidate set");
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const CandidateItem& c = candidates[i];
    if (c.label_cli == 1 && c.label_imp == 0)
      throw DataError("candidate " + std::to_string(i) +
                      ": click label without impression label");
    if (c.label_extra == 1 && c.label_imp == 0)
      throw DataError("candidate " + std::to_string(i) +
                      ": extra action label without impression label");
  }
}

}  // namespace ifa
