#pragma once

#include <string>
#include <vector>

#include "framespan/autodiff.hpp"
#include "framespan/config.hpp"
#include "framespan/corpus.hpp"
#include "framespan/lstm.hpp"

namespace framespan {

constexpr int kNoTarget = -1;

// Aligned per-token index streams feeding the token encoder.
struct TokenIds {
  std::vector<int> word;
  std::vector<int> pretrained;  // rows of the fixed table; 0 = absent
  std::vector<int> pos;

  int n() const { return static_cast<int>(word.size()); }
};

// Prediction-time ids: out-of-vocabulary words map to UNK, but keep their
// pretrained vector if the fixed table has one.
inline TokenIds make_token_ids(const Vocabulary& vocab, const PretrainedTable* pretrained,
                               const std::vector<std::string>& tokens,
                               const std::vector<std::string>& pos) {
  TokenIds ids;
  for (const auto& w : tokens) {
    ids.word.push_back(vocab.word_id(w));
    ids.pretrained.push_back(pretrained ? pretrained->row_of(w) : 0);
  }
  for (const auto& p : pos) ids.pos.push_back(vocab.pos_id(p));
  return ids;
}

// Training-time ids: the stochastic UNK flip replaces the whole token, so a
// flipped word also loses its pretrained vector.
inline TokenIds make_token_ids_train(const Vocabulary& vocab, const PretrainedTable* pretrained,
                                     const std::vector<std::string>& tokens,
                                     const std::vector<std::string>& pos, double unk_prob,
                                     Rng& rng) {
  TokenIds ids;
  for (const auto& w : tokens) {
    int id = train_word_id(vocab, w, unk_prob, rng);
    ids.word.push_back(id);
    bool unked = id == Vocabulary::kUnkWord;
    ids.pretrained.push_back(!unked && pretrained ? pretrained->row_of(w) : 0);
  }
  for (const auto& p : pos) ids.pos.push_back(vocab.pos_id(p));
  return ids;
}

// Signed token distance from the target start, clamped to
// [-distance_clamp, distance_clamp]; one extra row stands in when the
// sentence has no target (scaffold-only sentences).
inline int distance_row(int q, int target_start, int clamp) {
  if (target_start == kNoTarget) return 2 * clamp + 1;
  int d = q - target_start;
  if (d < -clamp) d = -clamp;
  if (d > clamp) d = clamp;
  return d + clamp;
}

// Span embeddings for every (i, j) with j - i + 1 <= b.
struct SpanTable {
  int n = 0;
  int b = 0;
  std::vector<Node> cells;

  bool has(int i, int j) const { return 0 <= i && i <= j && j < n && j - i + 1 <= b; }

  Node at(int i, int j) const {
    if (!has(i, j)) throw error(detail::cat("SpanTable: no span [", i, ",", j, "] for n=", n, " b=", b));
    return cells[static_cast<size_t>(i) * n + j];
  }

  size_t count() const {
    size_t c = 0;
    for (int i = 0; i < n; ++i) c += static_cast<size_t>(std::min(b, n - i));
    return c;
  }
};

// All learned tables and LSTMs shared by the argument model and the
// scaffold. Construction order is fixed; it defines serialization order.
struct EncoderParams {
  Parameter& word_table;
  Parameter& pos_table;
  Parameter& dist_table;
  LstmParams tok_fwd;
  LstmParams tok_bwd;
  LstmParams span_fwd;
  LstmParams span_bwd;
  LstmParams tgt;
  Parameter& frame_table;
  Parameter& lu_table;    // row 0 is the UNK lexical unit
  Parameter& role_table;  // row 0 is the null role
  int pretrained_dim;

  static EncoderParams create(ParameterStore& store, const Config& cfg, int num_words, int num_pos,
                              int num_frames, int num_lus, int num_roles, int pretrained_dim,
                              Rng& rng) {
    const int h = cfg.hidden_size;
    const int tok_in = cfg.dim_word + pretrained_dim + cfg.dim_pos + cfg.dim_distance;
    Parameter& words = store.add_uniform("enc/words", {num_words, cfg.dim_word}, rng);
    Parameter& pos = store.add_uniform("enc/pos", {num_pos, cfg.dim_pos}, rng);
    Parameter& dist =
        store.add_uniform("enc/dist", {2 * cfg.distance_clamp + 2, cfg.dim_distance}, rng);
    LstmParams tok_fwd = LstmParams::create(store, "enc/tok_fwd", tok_in, h, rng);
    LstmParams tok_bwd = LstmParams::create(store, "enc/tok_bwd", tok_in, h, rng);
    LstmParams span_fwd = LstmParams::create(store, "enc/span_fwd", 2 * h, h, rng);
    LstmParams span_bwd = LstmParams::create(store, "enc/span_bwd", 2 * h, h, rng);
    LstmParams tgt = LstmParams::create(store, "enc/tgt", 2 * h, h, rng);
    Parameter& frames = store.add_uniform("enc/frames", {num_frames, cfg.dim_frame}, rng);
    Parameter& lus = store.add_uniform("enc/lus", {num_lus + 1, cfg.dim_lu}, rng);
    Parameter& roles = store.add_uniform("enc/roles", {num_roles, cfg.dim_role}, rng);
    return {words, pos,      dist,    tok_fwd, tok_bwd, span_fwd,
            span_bwd, tgt, frames, lus,     roles,   pretrained_dim};
  }
};

// Contextual token vectors: a biLSTM over [d_q; e_q; o_q; distance], one
// 2h-dim output per token. input_masks, when given, multiply the input
// vectors elementwise (inverted dropout); pass nullptr at prediction.
inline std::vector<Node> encode_tokens(Graph& g, const EncoderParams& p, const Config& cfg,
                                       const TokenIds& ids, const PretrainedTable* pretrained,
                                       int target_start,
                                       const std::vector<Tensor>* input_masks = nullptr) {
  const int n = ids.n();
  if (n == 0) throw error("encode_tokens: empty sentence");
  if (ids.pos.size() != ids.word.size() || ids.pretrained.size() != ids.word.size())
    throw error("encode_tokens: misaligned id streams");
  if (input_masks && static_cast<int>(input_masks->size()) != n)
    throw error("encode_tokens: mask count does not match tokens");

  std::vector<Node> inputs;
  inputs.reserve(n);
  for (int q = 0; q < n; ++q) {
    std::vector<Node> parts;
    parts.push_back(g.lookup(p.word_table, ids.word[q]));
    if (p.pretrained_dim > 0) {
      if (!pretrained) throw error("encode_tokens: model expects pretrained vectors");
      parts.push_back(g.lookup_const(pretrained->table, ids.pretrained[q]));
    }
    parts.push_back(g.lookup(p.pos_table, ids.pos[q]));
    parts.push_back(g.lookup(p.dist_table, distance_row(q, target_start, cfg.distance_clamp)));
    Node v = g.concat(parts);
    if (input_masks) v = g.cmult(v, g.input((*input_masks)[q]));
    inputs.push_back(v);
  }

  std::vector<Node> fwd = lstm_run(g, p.tok_fwd, inputs);
  std::vector<Node> rev(inputs.rbegin(), inputs.rend());
  std::vector<Node> bwd = lstm_run(g, p.tok_bwd, rev);

  std::vector<Node> out;
  out.reserve(n);
  for (int q = 0; q < n; ++q) out.push_back(g.concat({fwd[q], bwd[n - 1 - q]}));
  return out;
}

// Span embedding of (i, j): the forward span LSTM's state at j from a run
// started at i, concatenated with the backward span LSTM's state at i from a
// run started at j. Each run is computed once and its prefix states serve
// every span sharing that endpoint.
inline SpanTable encode_spans(Graph& g, const EncoderParams& p, const std::vector<Node>& h_tok,
                              int b) {
  if (b < 1) throw error(detail::cat("encode_spans: b must be >= 1, got ", b));
  const int n = static_cast<int>(h_tok.size());
  SpanTable table;
  table.n = n;
  table.b = b;
  table.cells.assign(static_cast<size_t>(n) * n, Node{});

  std::vector<Node> fwd_part(static_cast<size_t>(n) * n);
  std::vector<Node> bwd_part(static_cast<size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    LstmState st = lstm_initial(g, p.span_fwd);
    for (int j = i; j < n && j - i + 1 <= b; ++j) {
      st = lstm_step(g, p.span_fwd, h_tok[j], st);
      fwd_part[static_cast<size_t>(i) * n + j] = st.h;
    }
  }
  for (int j = 0; j < n; ++j) {
    LstmState st = lstm_initial(g, p.span_bwd);
    for (int i = j; i >= 0 && j - i + 1 <= b; --i) {
      st = lstm_step(g, p.span_bwd, h_tok[i], st);
      bwd_part[static_cast<size_t>(i) * n + j] = st.h;
    }
  }
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n && j - i + 1 <= b; ++j) {
      size_t k = static_cast<size_t>(i) * n + j;
      table.cells[k] = g.concat({fwd_part[k], bwd_part[k]});
    }
  return table;
}

// Target-in-context vector: forward LSTM over h_tok from one token before
// the target to one after, truncated at the sentence boundaries.
inline Node encode_target(Graph& g, const EncoderParams& p, const std::vector<Node>& h_tok,
                          int target_start, int target_end) {
  const int n = static_cast<int>(h_tok.size());
  if (target_start < 0 || target_start > target_end || target_end >= n)
    throw error(detail::cat("encode_target: target [", target_start, ",", target_end,
                            "] out of bounds for n=", n));
  const int lo = std::max(0, target_start - 1);
  const int hi = std::min(n - 1, target_end + 1);
  LstmState st = lstm_initial(g, p.tgt);
  for (int q = lo; q <= hi; ++q) st = lstm_step(g, p.tgt, h_tok[q], st);
  return st.h;
}

// Learned frame and lexical-unit rows. lu_id -1 (unseen at prediction) maps
// to the UNK row.
inline std::pair<Node, Node> lookup_frame_lu(Graph& g, const EncoderParams& p, int frame_id,
                                             int lu_id) {
  if (frame_id < 0) throw error("lookup_frame_lu: invalid frame id");
  Node v_f = g.lookup(p.frame_table, frame_id);
  Node v_l = g.lookup(p.lu_table, lu_id + 1);
  return {v_f, v_l};
}

inline Node role_embedding(Graph& g, const EncoderParams& p, int role_row) {
  return g.lookup(p.role_table, role_row);
}

}  // namespace framespan
