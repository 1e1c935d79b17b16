#include "ifa/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "ifa/errors.hpp"

namespace ifa {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      // [gen]
      "gen.num_users", "gen.num_items", "gen.num_categories", "gen.num_topics",
      "gen.num_requests", "gen.m", "gen.n", "gen.w_cat", "gen.w_topic", "gen.w_profile",
      "gen.temperature", "gen.offset", "gen.noise_std", "gen.explore_std", "gen.budget",
      "gen.p_cat", "gen.p_topic", "gen.p_profile", "gen.cand_relevant_frac",
      "gen.cross_vocab", "gen.oracle_resamples", "gen.seed",
      // [model]
      "model.user_vocab", "model.item_vocab", "model.cat_vocab", "model.topic_vocab",
      "model.cross_vocab", "model.e_user", "model.e_item", "model.e_cat", "model.e_topic",
      "model.e_cross", "model.n_user_feats", "model.n_cross_feats", "model.attn_dim",
      "model.hidden", "model.baseline", "model.use_fsm", "model.use_ram", "model.ram_dense",
      "model.kernel", "model.top_k", "model.category_slot", "model.extra_head",
      "model.normalize_attention", "model.seed",
      // [train]
      "train.lr", "train.optimizer", "train.adam_beta1", "train.adam_beta2", "train.adam_eps",
      "train.lambda_cli", "train.lambda_extra", "train.batch_requests", "train.epochs",
      "train.clip", "train.seed", "train.eval_cadence", "train.log_every",
      "train.holdout_frac",
  };
  return keys;
}

}  // namespace

KvConfig KvConfig::parse_string(const std::string& text) {
  KvConfig cfg;
  std::istringstream is(text);
  std::string line, section;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw ConfigError("config line " + std::to_string(lineno) + ": unterminated section");
      section = trim(t.substr(1, t.size() - 2));
      if (section.empty())
        throw ConfigError("config line " + std::to_string(lineno) + ": empty section name");
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    if (section.empty())
      throw ConfigError("config line " + std::to_string(lineno) + ": key outside any section");
    cfg.kv_[section + "." + key] = value;
  }
  return cfg;
}

KvConfig KvConfig::parse_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("config: cannot open '" + path + "'");
  std::stringstream buf;
  buf << is.rdbuf();
  return parse_string(buf.str());
}

std::string KvConfig::get_str(const std::string& key, const std::string& def) const {
  const auto it = kv_.find(key);
  return it == kv_.end() ? def : it->second;
}

double KvConfig::get_f64(const std::string& key, double def) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return def;
  try {
    std::size_t used = 0;
    const double v = std::stod(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected a number, got '" + it->second + "'");
  }
}

std::size_t KvConfig::get_u64(const std::string& key, std::size_t def) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return def;
  try {
    std::size_t used = 0;
    const long long v = std::stoll(it->second, &used);
    if (used != it->second.size() || v < 0) throw std::invalid_argument("bad");
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected a non-negative integer, got '" +
                      it->second + "'");
  }
}

bool KvConfig::get_bool(const std::string& key, bool def) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return def;
  const std::string& v = it->second;
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config key '" + key + "': expected a boolean, got '" + v + "'");
}

std::vector<std::size_t> KvConfig::get_u64_list(const std::string& key,
                                                const std::vector<std::size_t>& def) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return def;
  std::vector<std::size_t> out;
  std::stringstream ss(it->second);
  std::string part;
  while (std::getline(ss, part, ',')) {
    part = trim(part);
    if (part.empty()) continue;
    try {
      out.push_back(static_cast<std::size_t>(std::stoull(part)));
    } catch (const std::exception&) {
      throw ConfigError("config key '" + key + "': expected comma-separated integers");
    }
  }
  return out;
}

void KvConfig::check_known() const {
  for (const auto& [key, _] : kv_) {
    if (known_keys().count(key) == 0)
      throw ConfigError("config: unknown key '" + key + "'");
  }
}

GenConfig gen_config_from(const KvConfig& cfg) {
  GenConfig g;
  g.num_users = cfg.get_u64("gen.num_users", g.num_users);
  g.num_items = cfg.get_u64("gen.num_items", g.num_items);
  g.num_categories = cfg.get_u64("gen.num_categories", g.num_categories);
  g.num_topics = cfg.get_u64("gen.num_topics", g.num_topics);
  g.num_requests = cfg.get_u64("gen.num_requests", g.num_requests);
  g.m = cfg.get_u64("gen.m", g.m);
  g.n = cfg.get_u64("gen.n", g.n);
  g.w_cat = cfg.get_f64("gen.w_cat", g.w_cat);
  g.w_topic = cfg.get_f64("gen.w_topic", g.w_topic);
  g.w_profile = cfg.get_f64("gen.w_profile", g.w_profile);
  g.temperature = cfg.get_f64("gen.temperature", g.temperature);
  g.offset = cfg.get_f64("gen.offset", g.offset);
  g.noise_std = cfg.get_f64("gen.noise_std", g.noise_std);
  g.explore_std = cfg.get_f64("gen.explore_std", g.explore_std);
  g.budget = cfg.get_u64("gen.budget", g.budget);
  g.p_cat = cfg.get_f64("gen.p_cat", g.p_cat);
  g.p_topic = cfg.get_f64("gen.p_topic", g.p_topic);
  g.p_profile = cfg.get_f64("gen.p_profile", g.p_profile);
  g.cand_relevant_frac = cfg.get_f64("gen.cand_relevant_frac", g.cand_relevant_frac);
  g.cross_vocab = cfg.get_u64("gen.cross_vocab", g.cross_vocab);
  g.oracle_resamples = cfg.get_u64("gen.oracle_resamples", g.oracle_resamples);
  g.seed = cfg.get_u64("gen.seed", static_cast<std::size_t>(g.seed));
  g.validate();
  return g;
}

ModelConfig model_config_from(const KvConfig& cfg) {
  const GenConfig g = gen_config_from(cfg);
  ModelConfig m;
  // Default vocabularies cover the generator's id space (+1 for reserved 0).
  m.user_vocab = cfg.get_u64("model.user_vocab", g.num_users + 1);
  m.item_vocab = cfg.get_u64("model.item_vocab", g.num_items + 1);
  m.cat_vocab = cfg.get_u64("model.cat_vocab", g.num_categories + 1);
  m.topic_vocab = cfg.get_u64("model.topic_vocab", g.num_topics + 1);
  m.cross_vocab = cfg.get_u64("model.cross_vocab", g.cross_vocab + 1);
  m.e_user = cfg.get_u64("model.e_user", m.e_user);
  m.e_item = cfg.get_u64("model.e_item", m.e_item);
  m.e_cat = cfg.get_u64("model.e_cat", m.e_cat);
  m.e_topic = cfg.get_u64("model.e_topic", m.e_topic);
  m.e_cross = cfg.get_u64("model.e_cross", m.e_cross);
  m.n_user_feats = cfg.get_u64("model.n_user_feats", m.n_user_feats);
  m.n_cross_feats = cfg.get_u64("model.n_cross_feats", m.n_cross_feats);
  m.attn_dim = cfg.get_u64("model.attn_dim", m.attn_dim);
  m.hidden = cfg.get_u64_list("model.hidden", m.hidden);
  m.baseline = baseline_from_string(cfg.get_str("model.baseline", "ifa"));
  m.use_fsm = cfg.get_bool("model.use_fsm", m.use_fsm);
  m.use_ram = cfg.get_bool("model.use_ram", m.use_ram);
  m.ram_dense = cfg.get_bool("model.ram_dense", m.ram_dense);
  m.kernel = kernel_from_string(cfg.get_str("model.kernel", "softplus"));
  m.top_k = cfg.get_u64("model.top_k", m.top_k);
  m.category_slot = cfg.get_u64("model.category_slot", m.category_slot);
  m.extra_head = cfg.get_bool("model.extra_head", m.extra_head);
  m.normalize_attention = cfg.get_bool("model.normalize_attention", m.normalize_attention);
  m.validate();
  return m;
}

TrainConfig train_config_from(const KvConfig& cfg) {
  TrainConfig t;
  t.lr = cfg.get_f64("train.lr", t.lr);
  const std::string opt = cfg.get_str("train.optimizer", "adam");
  if (opt == "adam") {
    t.optimizer = OptKind::adam;
  } else if (opt == "sgd") {
    t.optimizer = OptKind::sgd;
  } else {
    throw ConfigError("train.optimizer: expected adam|sgd, got '" + opt + "'");
  }
  t.adam_beta1 = cfg.get_f64("train.adam_beta1", t.adam_beta1);
  t.adam_beta2 = cfg.get_f64("train.adam_beta2", t.adam_beta2);
  t.adam_eps = cfg.get_f64("train.adam_eps", t.adam_eps);
  t.lambda_cli = cfg.get_f64("train.lambda_cli", t.lambda_cli);
  t.lambda_extra = cfg.get_f64("train.lambda_extra", t.lambda_extra);
  t.batch_requests = cfg.get_u64("train.batch_requests", t.batch_requests);
  t.epochs = cfg.get_u64("train.epochs", t.epochs);
  t.clip = cfg.get_f64("train.clip", t.clip);
  t.seed = cfg.get_u64("train.seed", static_cast<std::size_t>(t.seed));
  t.eval_cadence = cfg.get_u64("train.eval_cadence", t.eval_cadence);
  t.log_every = cfg.get_u64("train.log_every", t.log_every);
  t.holdout_frac = cfg.get_f64("train.holdout_frac", t.holdout_frac);
  t.validate();
  return t;
}

}  // namespace ifa
