#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ifa/attention.hpp"
#include "ifa/embedding.hpp"
#include "ifa/mlp.hpp"
#include "ifa/request.hpp"

namespace ifa {

// Which sequence-interaction mechanism scores the candidate set.
//   ifa      - linear cross attention over the full sequence (+ optional
//              candidate-set self attention)
//   avgpool  - column mean of the sequence embeddings, shared by candidates
//   din      - dense softmax attention over the k most recent items
//   sim_hard - per-candidate category hard search, then dense attention over
//              the surviving sub-sequence
enum class BaselineKind { ifa, avgpool, din, sim_hard };

BaselineKind baseline_from_string(const std::string& s);
const char* baseline_name(BaselineKind b);

// Item features are a fixed three-slot schema: id, category, topic.
inline constexpr std::size_t kItemFeatSlots = 3;

struct ModelConfig {
  std::size_t user_vocab = 20001;
  std::size_t item_vocab = 2001;
  std::size_t cat_vocab = 64;
  std::size_t topic_vocab = 64;
  std::size_t cross_vocab = 10008;

  std::size_t e_user = 8;
  std::size_t e_item = 8;
  std::size_t e_cat = 8;
  std::size_t e_topic = 8;
  std::size_t e_cross = 8;
  std::size_t n_user_feats = 1;
  std::size_t n_cross_feats = 1;

  std::size_t attn_dim = 16;
  std::vector<std::size_t> hidden = {64, 32};

  BaselineKind baseline = BaselineKind::ifa;
  bool use_fsm = true;
  bool use_ram = true;
  bool ram_dense = false;  // swap dense softmax into the candidate self attention
  KernelKind kernel = KernelKind::softplus;
  std::size_t top_k = 16;         // sub-sequence length for din / sim_hard
  std::size_t category_slot = 1;  // which item feature slot carries the category
  bool extra_head = false;
  bool normalize_attention = true;  // fault flag: false disables the degree normalizer

  std::size_t item_dim() const { return e_item + e_cat + e_topic; }
  std::size_t user_dim() const { return n_user_feats * e_user; }
  std::size_t cross_dim() const { return n_cross_feats * e_cross; }
  std::size_t seq_block_dim() const;
  std::size_t ram_block_dim() const;
  std::size_t tower_in_dim() const;

  void validate() const;
  std::string canonical_text() const;
  std::uint64_t hash() const;
  std::vector<double> encode() const;
  static ModelConfig decode(std::span<const double> v);
};

struct ModelParams {
  EmbeddingTable user, item, cat, topic, cross;
  std::optional<AttentionParams> fsm, ram, esu;
  MlpTower imp, cli;
  std::optional<MlpTower> extra;
};

struct EmbedCache {
  Matrix f_can;  // m x item_dim
  Matrix f_cro;  // m x cross_dim
  Matrix f_seq;  // n x item_dim
  Matrix f_u;    // m x user_dim (one user vector repeated)
};

struct ForwardCache {
  Request req;
  EmbedCache emb;
  std::size_t seq_block = 0, ram_block = 0;  // concat widths
  LinearAttentionCache fsm_cache;
  LinearAttentionCache ram_cache;
  DenseSoftmaxCache ram_dense_cache;
  DenseSoftmaxCache din_cache;
  std::vector<std::size_t> din_indices;
  std::vector<DenseSoftmaxCache> sim_caches;
  std::vector<std::vector<std::size_t>> sim_indices;
  Matrix f_concat;
  MlpCache imp_cache, cli_cache, extra_cache;
  std::vector<ScoredCandidate> scored;
  bool valid = false;
};

// Indices of sequence items whose category equals `target_category`, keeping
// the k most recent matches, emitted in original sequence order.
std::vector<std::size_t> gsu_hard_search(std::span<const SeqItem> sequence,
                                         std::int32_t target_category, std::size_t k);

// The full ranking model: embedding tables, the configured sequence
// interaction block, optional candidate-set self attention, and one sigmoid
// tower per predicted action. Forward-only scoring over const params is safe
// to run concurrently; backward and optimizer steps need exclusive access.
class IfaModel {
 public:
  IfaModel(ModelConfig cfg, std::uint64_t seed);

  const ModelConfig& config() const { return cfg_; }
  ModelParams& params() { return params_; }
  const ModelParams& params() const { return params_; }

  // Named trainable tensors in fixed registration order.
  ParamRefs param_refs();

  void embed_request(const Request& req, EmbedCache& out) const;

  std::vector<ScoredCandidate> forward(const Request& req, ForwardCache& cache) const;

  // Convenience forward when intermediates are not needed afterwards.
  std::vector<ScoredCandidate> score(const Request& req) const;

  // Accumulates gradients for every parameter reachable in the active
  // configuration. d_* are per-candidate gradients of the loss w.r.t. the
  // tower outputs (each m x 1).
  void backward(const Matrix& d_imp, const Matrix& d_cli, ForwardCache& cache);
  void backward(const Matrix& d_imp, const Matrix& d_cli, const Matrix& d_extra,
                ForwardCache& cache);

 private:
  Matrix sequence_block(const Request& req, ForwardCache& fc) const;
  Matrix ram_block(ForwardCache& fc) const;
  void embed_backward(const Matrix& d_can, const Matrix& d_cro, const Matrix& d_seq,
                      const Matrix& d_u, const Request& req);

  ModelConfig cfg_;
  ModelParams params_;
};

}  // namespace ifa
