#include "ifa/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ifa/errors.hpp"

namespace ifa {

BaselineKind baseline_from_string(const std::string& s) {
  if (s == "ifa") return BaselineKind::ifa;
  if (s == "avgpool") return BaselineKind::avgpool;
  if (s == "din") return BaselineKind::din;
  if (s == "sim_hard") return BaselineKind::sim_hard;
  throw ConfigError("unknown baseline '" + s + "' (expected ifa|avgpool|din|sim_hard)");
}

const char* baseline_name(BaselineKind b) {
  switch (b) {
    case BaselineKind::ifa: return "ifa";
    case BaselineKind::avgpool: return "avgpool";
    case BaselineKind::din: return "din";
    default: return "sim_hard";
  }
}

std::size_t ModelConfig::seq_block_dim() const {
  switch (baseline) {
    case BaselineKind::ifa: return use_fsm ? attn_dim : 0;
    case BaselineKind::avgpool: return item_dim();
    case BaselineKind::din:
    case BaselineKind::sim_hard: return attn_dim;
  }
  return 0;
}

std::size_t ModelConfig::ram_block_dim() const {
  return (baseline == BaselineKind::ifa && use_ram) ? attn_dim : 0;
}

std::size_t ModelConfig::tower_in_dim() const {
  return seq_block_dim() + ram_block_dim() + user_dim() + cross_dim();
}

void ModelConfig::validate() const {
  if (user_vocab == 0 || item_vocab == 0 || cat_vocab == 0 || topic_vocab == 0 ||
      cross_vocab == 0)
    throw ConfigError("model: all vocab sizes must be >= 1");
  if (e_user == 0 || e_item == 0 || e_cat == 0 || e_topic == 0 || e_cross == 0)
    throw ConfigError("model: all embedding dims must be >= 1");
  if (n_user_feats == 0 || n_cross_feats == 0)
    throw ConfigError("model: feature counts must be >= 1");
  if (attn_dim == 0) throw ConfigError("model: attn_dim must be >= 1");
  if (category_slot >= kItemFeatSlots)
    throw ConfigError("model: category_slot out of range");
  if ((baseline == BaselineKind::din || baseline == BaselineKind::sim_hard) && top_k == 0)
    throw ConfigError("model: top_k must be >= 1 for din/sim_hard");
  if (tower_in_dim() == 0) throw ConfigError("model: tower input width is zero");
}

std::string ModelConfig::canonical_text() const {
  std::ostringstream os;
  os << "user_vocab=" << user_vocab << "\nitem_vocab=" << item_vocab
     << "\ncat_vocab=" << cat_vocab << "\ntopic_vocab=" << topic_vocab
     << "\ncross_vocab=" << cross_vocab << "\ne_user=" << e_user << "\ne_item=" << e_item
     << "\ne_cat=" << e_cat << "\ne_topic=" << e_topic << "\ne_cross=" << e_cross
     << "\nn_user_feats=" << n_user_feats << "\nn_cross_feats=" << n_cross_feats
     << "\nattn_dim=" << attn_dim << "\nhidden=";
  for (std::size_t i = 0; i < hidden.size(); ++i) os << (i ? "," : "") << hidden[i];
  os << "\nbaseline=" << baseline_name(baseline) << "\nuse_fsm=" << use_fsm
     << "\nuse_ram=" << use_ram << "\nram_dense=" << ram_dense
     << "\nkernel=" << kernel_name(kernel) << "\ntop_k=" << top_k
     << "\ncategory_slot=" << category_slot << "\nextra_head=" << extra_head
     << "\nnormalize_attention=" << normalize_attention << "\n";
  return os.str();
}

std::uint64_t ModelConfig::hash() const {
  // FNV-1a over the canonical text.
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : canonical_text()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::vector<double> ModelConfig::encode() const {
  std::vector<double> v;
  v.push_back(1.0);  // schema version
  auto push = [&v](double x) { v.push_back(x); };
  push(static_cast<double>(user_vocab));
  push(static_cast<double>(item_vocab));
  push(static_cast<double>(cat_vocab));
  push(static_cast<double>(topic_vocab));
  push(static_cast<double>(cross_vocab));
  push(static_cast<double>(e_user));
  push(static_cast<double>(e_item));
  push(static_cast<double>(e_cat));
  push(static_cast<double>(e_topic));
  push(static_cast<double>(e_cross));
  push(static_cast<double>(n_user_feats));
  push(static_cast<double>(n_cross_feats));
  push(static_cast<double>(attn_dim));
  push(static_cast<double>(hidden.size()));
  for (std::size_t h : hidden) push(static_cast<double>(h));
  push(static_cast<double>(baseline));
  push(use_fsm ? 1.0 : 0.0);
  push(use_ram ? 1.0 : 0.0);
  push(ram_dense ? 1.0 : 0.0);
  push(kernel == KernelKind::softplus ? 0.0 : 1.0);
  push(static_cast<double>(top_k));
  push(static_cast<double>(category_slot));
  push(extra_head ? 1.0 : 0.0);
  push(normalize_attention ? 1.0 : 0.0);
  return v;
}

ModelConfig ModelConfig::decode(std::span<const double> v) {
  if (v.size() < 15 || v[0] != 1.0) throw IoError("model config blob: bad version or size");
  std::size_t at = 1;
  auto next = [&]() -> double {
    if (at >= v.size()) throw IoError("model config blob: truncated");
    return v[at++];
  };
  auto next_sz = [&]() { return static_cast<std::size_t>(next()); };
  ModelConfig c;
  c.user_vocab = next_sz();
  c.item_vocab = next_sz();
  c.cat_vocab = next_sz();
  c.topic_vocab = next_sz();
  c.cross_vocab = next_sz();
  c.e_user = next_sz();
  c.e_item = next_sz();
  c.e_cat = next_sz();
  c.e_topic = next_sz();
  c.e_cross = next_sz();
  c.n_user_feats = next_sz();
  c.n_cross_feats = next_sz();
  c.attn_dim = next_sz();
  const std::size_t nh = next_sz();
  c.hidden.clear();
  for (std::size_t i = 0; i < nh; ++i) c.hidden.push_back(next_sz());
  c.baseline = static_cast<BaselineKind>(static_cast<int>(next()));
  c.use_fsm = next() != 0.0;
  c.use_ram = next() != 0.0;
  c.ram_dense = next() != 0.0;
  c.kernel = next() == 0.0 ? KernelKind::softplus : KernelKind::relu_eps;
  c.top_k = next_sz();
  c.category_slot = next_sz();
  c.extra_head = next() != 0.0;
  c.normalize_attention = next() != 0.0;
  c.validate();
  return c;
}

std::vector<std::size_t> gsu_hard_search(std::span<const SeqItem> sequence,
                                         std::int32_t target_category, std::size_t k) {
  std::vector<std::size_t> matches;
  for (std::size_t i = 0; i < sequence.size(); ++i) {
    if (sequence[i].category == target_category) matches.push_back(i);
  }
  if (matches.size() > k) {
    // keep the k most recent, preserving original order
    matches.erase(matches.begin(), matches.end() - static_cast<std::ptrdiff_t>(k));
  }
  return matches;
}

IfaModel::IfaModel(ModelConfig cfg, std::uint64_t seed) : cfg_(std::move(cfg)) {
  cfg_.validate();
  Rng rng(seed);
  params_.user = EmbeddingTable::init("user", cfg_.user_vocab, cfg_.e_user, rng);
  params_.item = EmbeddingTable::init("item_id", cfg_.item_vocab, cfg_.e_item, rng);
  params_.cat = EmbeddingTable::init("category", cfg_.cat_vocab, cfg_.e_cat, rng);
  params_.topic = EmbeddingTable::init("topic", cfg_.topic_vocab, cfg_.e_topic, rng);
  params_.cross = EmbeddingTable::init("cross", cfg_.cross_vocab, cfg_.e_cross, rng);

  const std::size_t di = cfg_.item_dim();
  if (cfg_.baseline == BaselineKind::ifa) {
    // fsm/ram blocks exist for every ifa model; ablation flags only gate the
    // forward graph, so disabled blocks keep (and never update) their init.
    params_.fsm = AttentionParams::init(di, di, di, cfg_.attn_dim, rng);
    params_.ram = AttentionParams::init(di, di, di, cfg_.attn_dim, rng);
  } else if (cfg_.baseline == BaselineKind::din || cfg_.baseline == BaselineKind::sim_hard) {
    params_.esu = AttentionParams::init(di, di, di, cfg_.attn_dim, rng);
  }

  params_.imp = MlpTower::init(cfg_.tower_in_dim(), cfg_.hidden, rng);
  params_.cli = MlpTower::init(cfg_.tower_in_dim(), cfg_.hidden, rng);
  if (cfg_.extra_head) params_.extra = MlpTower::init(cfg_.tower_in_dim(), cfg_.hidden, rng);
}

ParamRefs IfaModel::param_refs() {
  ParamRefs out;
  out.push_back({"emb.user", &params_.user.table});
  out.push_back({"emb.item", &params_.item.table});
  out.push_back({"emb.cat", &params_.cat.table});
  out.push_back({"emb.topic", &params_.topic.table});
  out.push_back({"emb.cross", &params_.cross.table});
  if (params_.fsm) params_.fsm->collect("fsm", out);
  if (params_.ram) params_.ram->collect("ram", out);
  if (params_.esu) params_.esu->collect("esu", out);
  params_.imp.collect("tower.imp", out);
  params_.cli.collect("tower.cli", out);
  if (params_.extra) params_.extra->collect("tower.extra", out);
  return out;
}

void IfaModel::embed_request(const Request& req, EmbedCache& out) const {
  const std::size_t m = req.candidates.size();
  const std::size_t n = req.sequence.size();
  if (m == 0) throw DataError("embed: empty candidate set");
  if (req.user_feats.size() != cfg_.n_user_feats)
    throw DataError("field 'user': expected " + std::to_string(cfg_.n_user_feats) +
                    " feature id(s), got " + std::to_string(req.user_feats.size()));

  const EmbeddingTable* slot_tab[kItemFeatSlots] = {&params_.item, &params_.cat,
                                                    &params_.topic};

  out.f_can = Matrix(m, cfg_.item_dim());
  out.f_cro = Matrix(m, cfg_.cross_dim());
  out.f_u = Matrix(m, cfg_.user_dim());
  out.f_seq = Matrix(n, cfg_.item_dim());

  // One user vector, repeated for every candidate row.
  std::vector<double> uvec(cfg_.user_dim());
  for (std::size_t s = 0; s < cfg_.n_user_feats; ++s)
    params_.user.lookup_into(req.user_feats[s], uvec.data() + s * cfg_.e_user);
  for (std::size_t i = 0; i < m; ++i)
    std::copy(uvec.begin(), uvec.end(), out.f_u.row_ptr(i));

  for (std::size_t i = 0; i < m; ++i) {
    const CandidateItem& c = req.candidates[i];
    if (c.item_feats.size() != kItemFeatSlots)
      throw DataError("field 'candidate.item_feats': expected " +
                      std::to_string(kItemFeatSlots) + " ids, got " +
                      std::to_string(c.item_feats.size()));
    if (c.cross_feats.size() != cfg_.n_cross_feats)
      throw DataError("field 'candidate.cross_feats': expected " +
                      std::to_string(cfg_.n_cross_feats) + " ids, got " +
                      std::to_string(c.cross_feats.size()));
    double* row = out.f_can.row_ptr(i);
    for (std::size_t s = 0; s < kItemFeatSlots; ++s) {
      slot_tab[s]->lookup_into(c.item_feats[s], row);
      row += slot_tab[s]->dim;
    }
    double* xrow = out.f_cro.row_ptr(i);
    for (std::size_t s = 0; s < cfg_.n_cross_feats; ++s) {
      params_.cross.lookup_into(c.cross_feats[s], xrow);
      xrow += cfg_.e_cross;
    }
  }

  for (std::size_t t = 0; t < n; ++t) {
    const SeqItem& it = req.sequence[t];
    if (it.item_feats.size() != kItemFeatSlots)
      throw DataError("field 'sequence.item_feats': expected " +
                      std::to_string(kItemFeatSlots) + " ids, got " +
                      std::to_string(it.item_feats.size()));
    double* row = out.f_seq.row_ptr(t);
    for (std::size_t s = 0; s < kItemFeatSlots; ++s) {
      slot_tab[s]->lookup_into(it.item_feats[s], row);
      row += slot_tab[s]->dim;
    }
  }
}

Matrix IfaModel::sequence_block(const Request& req, ForwardCache& fc) const {
  const std::size_t m = req.candidates.size();
  const std::size_t n = req.sequence.size();

  switch (cfg_.baseline) {
    case BaselineKind::ifa: {
      if (!cfg_.use_fsm) return Matrix();
      if (n == 0) return Matrix::zeros(m, cfg_.attn_dim);  // no information
      AttentionOutput ao =
          linear_attention_forward(fc.emb.f_can, fc.emb.f_seq, fc.emb.f_seq, *params_.fsm,
                                   cfg_.kernel, cfg_.normalize_attention);
      fc.fsm_cache = std::move(ao.cache);
      return std::move(ao.output);
    }
    case BaselineKind::avgpool: {
      Matrix block(m, cfg_.item_dim(), 0.0);
      if (n > 0) {
        Matrix mean = col_sums(fc.emb.f_seq);
        scale_inplace(mean, 1.0 / static_cast<double>(n));
        for (std::size_t i = 0; i < m; ++i) block.set_row(i, mean);
      }
      return block;
    }
    case BaselineKind::din: {
      const std::size_t k = std::min<std::size_t>(cfg_.top_k, n);
      if (k == 0) return Matrix::zeros(m, cfg_.attn_dim);
      fc.din_indices.clear();
      for (std::size_t t = n - k; t < n; ++t) fc.din_indices.push_back(t);
      Matrix sub = fc.emb.f_seq.take_rows(fc.din_indices);
      return dense_softmax_attention(fc.emb.f_can, sub, sub, *params_.esu, &fc.din_cache);
    }
    case BaselineKind::sim_hard: {
      Matrix block(m, cfg_.attn_dim, 0.0);
      fc.sim_caches.assign(m, DenseSoftmaxCache{});
      fc.sim_indices.assign(m, {});
      for (std::size_t i = 0; i < m; ++i) {
        const std::int32_t target = req.candidates[i].item_feats[cfg_.category_slot];
        auto idx = gsu_hard_search(req.sequence, target, cfg_.top_k);
        if (idx.empty()) continue;  // empty hard-search result: zero row
        Matrix sub = fc.emb.f_seq.take_rows(idx);
        Matrix q = fc.emb.f_can.row_copy(i);
        Matrix o = dense_softmax_attention(q, sub, sub, *params_.esu, &fc.sim_caches[i]);
        block.set_row(i, o);
        fc.sim_indices[i] = std::move(idx);
      }
      return block;
    }
  }
  return Matrix();
}

Matrix IfaModel::ram_block(ForwardCache& fc) const {
  if (cfg_.ram_dense) {
    return dense_softmax_attention(fc.emb.f_can, fc.emb.f_can, fc.emb.f_can, *params_.ram,
                                   &fc.ram_dense_cache);
  }
  AttentionOutput ao = linear_attention_forward(fc.emb.f_can, fc.emb.f_can, fc.emb.f_can,
                                                *params_.ram, cfg_.kernel,
                                                cfg_.normalize_attention);
  fc.ram_cache = std::move(ao.cache);
  return std::move(ao.output);
}

std::vector<ScoredCandidate> IfaModel::forward(const Request& req, ForwardCache& fc) const {
  req.validate();
  fc = ForwardCache{};
  fc.req = req;
  embed_request(req, fc.emb);

  Matrix seq_blk = sequence_block(req, fc);
  fc.seq_block = seq_blk.cols();

  Matrix ram_blk;
  if (cfg_.ram_block_dim() > 0) {
    ram_blk = ram_block(fc);
    fc.ram_block = ram_blk.cols();
  }

  fc.f_concat = concat_cols({&seq_blk, &ram_blk, &fc.emb.f_u, &fc.emb.f_cro});

  const Matrix y_imp = mlp_forward(params_.imp, fc.f_concat, fc.imp_cache);
  const Matrix y_cli = mlp_forward(params_.cli, fc.f_concat, fc.cli_cache);
  Matrix y_extra;
  if (params_.extra) y_extra = mlp_forward(*params_.extra, fc.f_concat, fc.extra_cache);

  const std::size_t m = req.candidates.size();
  fc.scored.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    ScoredCandidate& s = fc.scored[i];
    s.y_imp = y_imp(i, 0);
    s.y_cli = y_cli(i, 0);
    s.pitctr = s.y_imp * s.y_cli;
    if (params_.extra) {
      s.y_extra = y_extra(i, 0);
      s.pitctr_extra = s.y_imp * s.y_extra;
    }
  }
  fc.valid = true;
  return fc.scored;
}

std::vector<ScoredCandidate> IfaModel::score(const Request& req) const {
  ForwardCache fc;
  return forward(req, fc);
}

void IfaModel::backward(const Matrix& d_imp, const Matrix& d_cli, ForwardCache& fc) {
  backward(d_imp, d_cli, Matrix(), fc);
}

void IfaModel::backward(const Matrix& d_imp, const Matrix& d_cli, const Matrix& d_extra,
                        ForwardCache& fc) {
  if (!fc.valid) throw UsageError("model backward: cache missing or already consumed");
  const std::size_t m = fc.req.candidates.size();
  const std::size_t n = fc.req.sequence.size();
  if (d_imp.rows() != m || d_imp.cols() != 1 || d_cli.rows() != m || d_cli.cols() != 1)
    throw UsageError("model backward: tower grads must be m x 1");

  Matrix d_f = mlp_backward(params_.imp, d_imp, fc.imp_cache);
  add_inplace(d_f, mlp_backward(params_.cli, d_cli, fc.cli_cache));
  if (params_.extra && !d_extra.empty())
    add_inplace(d_f, mlp_backward(*params_.extra, d_extra, fc.extra_cache));

  std::size_t at = 0;
  Matrix d_seq_block, d_ram_block;
  if (fc.seq_block > 0) {
    d_seq_block = slice_cols(d_f, at, fc.seq_block);
    at += fc.seq_block;
  }
  if (fc.ram_block > 0) {
    d_ram_block = slice_cols(d_f, at, fc.ram_block);
    at += fc.ram_block;
  }
  Matrix d_u = slice_cols(d_f, at, cfg_.user_dim());
  at += cfg_.user_dim();
  Matrix d_cro = slice_cols(d_f, at, cfg_.cross_dim());

  Matrix d_can(m, cfg_.item_dim(), 0.0);
  Matrix d_seq(n, cfg_.item_dim(), 0.0);

  switch (cfg_.baseline) {
    case BaselineKind::ifa: {
      if (cfg_.use_fsm && n > 0) {
        AttentionInputGrads g =
            linear_attention_backward(d_seq_block, fc.fsm_cache, *params_.fsm);
        add_inplace(d_can, g.e_q);
        add_inplace(d_seq, g.e_k);
        add_inplace(d_seq, g.e_v);
      }
      break;
    }
    case BaselineKind::avgpool: {
      if (n > 0 && fc.seq_block > 0) {
        Matrix cs = col_sums(d_seq_block);
        scale_inplace(cs, 1.0 / static_cast<double>(n));
        for (std::size_t t = 0; t < n; ++t)
          d_seq.add_to_row(t, cs.row_ptr(0), cs.cols());
      }
      break;
    }
    case BaselineKind::din: {
      if (fc.din_cache.valid) {
        AttentionInputGrads g =
            dense_softmax_attention_backward(d_seq_block, fc.din_cache, *params_.esu);
        add_inplace(d_can, g.e_q);
        for (std::size_t r = 0; r < fc.din_indices.size(); ++r) {
          d_seq.add_to_row(fc.din_indices[r], g.e_k.row_ptr(r), g.e_k.cols());
          d_seq.add_to_row(fc.din_indices[r], g.e_v.row_ptr(r), g.e_v.cols());
        }
      }
      break;
    }
    case BaselineKind::sim_hard: {
      for (std::size_t i = 0; i < m; ++i) {
        if (!fc.sim_caches[i].valid) continue;
        Matrix gi = d_seq_block.row_copy(i);
        AttentionInputGrads g =
            dense_softmax_attention_backward(gi, fc.sim_caches[i], *params_.esu);
        d_can.add_to_row(i, g.e_q.row_ptr(0), g.e_q.cols());
        const auto& idx = fc.sim_indices[i];
        for (std::size_t r = 0; r < idx.size(); ++r) {
          d_seq.add_to_row(idx[r], g.e_k.row_ptr(r), g.e_k.cols());
          d_seq.add_to_row(idx[r], g.e_v.row_ptr(r), g.e_v.cols());
        }
      }
      break;
    }
  }

  if (fc.ram_block > 0) {
    AttentionInputGrads g =
        cfg_.ram_dense
            ? dense_softmax_attention_backward(d_ram_block, fc.ram_dense_cache, *params_.ram)
            : linear_attention_backward(d_ram_block, fc.ram_cache, *params_.ram);
    add_inplace(d_can, g.e_q);
    add_inplace(d_can, g.e_k);
    add_inplace(d_can, g.e_v);
  }

  embed_backward(d_can, d_cro, d_seq, d_u, fc.req);
  fc.valid = false;  // one backward per forward
}

void IfaModel::embed_backward(const Matrix& d_can, const Matrix& d_cro, const Matrix& d_seq,
                              const Matrix& d_u, const Request& req) {
  EmbeddingTable* slot_tab[kItemFeatSlots] = {&params_.item, &params_.cat, &params_.topic};

  for (std::size_t i = 0; i < req.candidates.size(); ++i) {
    const CandidateItem& c = req.candidates[i];
    const double* row = d_can.row_ptr(i);
    for (std::size_t s = 0; s < kItemFeatSlots; ++s) {
      slot_tab[s]->accumulate(c.item_feats[s], row);
      row += slot_tab[s]->dim;
    }
    const double* xrow = d_cro.row_ptr(i);
    for (std::size_t s = 0; s < cfg_.n_cross_feats; ++s) {
      params_.cross.accumulate(c.cross_feats[s], xrow);
      xrow += cfg_.e_cross;
    }
  }

  for (std::size_t t = 0; t < req.sequence.size(); ++t) {
    const double* row = d_seq.row_ptr(t);
    for (std::size_t s = 0; s < kItemFeatSlots; ++s) {
      slot_tab[s]->accumulate(req.sequence[t].item_feats[s], row);
      row += slot_tab[s]->dim;
    }
  }

  // The user vector was broadcast over candidate rows; its gradient is the
  // column sum.
  Matrix du_sum = col_sums(d_u);
  const double* urow = du_sum.row_ptr(0);
  for (std::size_t s = 0; s < cfg_.n_user_feats; ++s) {
    params_.user.accumulate(req.user_feats[s], urow);
    urow += cfg_.e_user;
  }
}

}  // namespace ifa
