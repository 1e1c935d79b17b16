#pragma once

#include <map>
#include <string>
#include <vector>

#include "ifa/generator.hpp"
#include "ifa/model.hpp"
#include "ifa/train.hpp"

namespace ifa {

// Flat key = value configuration with [section] headers and '#' comments.
// Keys are addressed as "section.key". Command-line flags override file
// values through set().
class KvConfig {
 public:
  KvConfig() = default;

  static KvConfig parse_file(const std::string& path);    // IoError if unreadable
  static KvConfig parse_string(const std::string& text);  // ConfigError on syntax

  bool has(const std::string& key) const { return kv_.count(key) != 0; }
  void set(const std::string& key, const std::string& value) { kv_[key] = value; }

  std::string get_str(const std::string& key, const std::string& def) const;
  double get_f64(const std::string& key, double def) const;
  std::size_t get_u64(const std::string& key, std::size_t def) const;
  bool get_bool(const std::string& key, bool def) const;
  std::vector<std::size_t> get_u64_list(const std::string& key,
                                        const std::vector<std::size_t>& def) const;

  // Rejects keys outside the known schema (typo guard).
  void check_known() const;

 private:
  std::map<std::string, std::string> kv_;
};

GenConfig gen_config_from(const KvConfig& cfg);
// Vocab sizes default to covering the [gen] id space of the same file.
ModelConfig model_config_from(const KvConfig& cfg);
TrainConfig train_config_from(const KvConfig& cfg);

}  // namespace ifa
