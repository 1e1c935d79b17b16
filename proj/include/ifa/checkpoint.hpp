#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "ifa/model.hpp"

namespace ifa {

// Versioned binary checkpoint:
//   magic "IFA1" | u64 config hash | u64 step | u64 tensor count |
//   per tensor: u32 name length | name bytes | u64 rows | u64 cols |
//               rows*cols f64 little-endian
// The first tensor, "__config__", is the encoded model configuration, so a
// checkpoint reconstructs its model without a side channel.
void save_checkpoint(const std::string& path, IfaModel& model, std::uint64_t step);

struct LoadedCheckpoint {
  std::unique_ptr<IfaModel> model;
  std::uint64_t step = 0;
};

LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace ifa
