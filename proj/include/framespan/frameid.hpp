#pragma once

// Frame identification. A separately trained disambiguator: encode the
// sentence (word, pretrained, POS only), summarize the target, then score
// each frame the lexical unit can evoke with a per-frame bilinear-ish scorer
// nu(f) = w3_f * relu(w4_f . [u_t; u_l]).

#include <cmath>
#include <vector>

#include "framespan/autodiff.hpp"
#include "framespan/corpus.hpp"
#include "framespan/encoders.hpp"
#include "framespan/error.hpp"
#include "framespan/lstm.hpp"

namespace framespan {

struct FrameIdParams {
  Parameter& word_table;
  Parameter& pos_table;
  LstmParams tok_fwd;
  LstmParams tok_bwd;
  LstmParams tgt;
  Parameter& lu_table;  // row 0 reserved for unseen lexical units
  Parameter& w3;        // one scalar per frame
  Parameter& w4;        // one row per frame
  int pretrained_dim = 0;

  static FrameIdParams create(ParameterStore& store, const Config& cfg, int num_words,
                              int num_pos, int num_frames, int num_lus, int pretrained_dim,
                              Rng& rng) {
    int h = cfg.hidden_size;
    int tok_in = cfg.dim_word + pretrained_dim + cfg.dim_pos;
    Parameter& words = store.add_uniform("frameid/words", {num_words, cfg.dim_word}, rng);
    Parameter& pos = store.add_uniform("frameid/pos", {num_pos, cfg.dim_pos}, rng);
    LstmParams tok_fwd = LstmParams::create(store, "frameid/tok_fwd", tok_in, h, rng);
    LstmParams tok_bwd = LstmParams::create(store, "frameid/tok_bwd", tok_in, h, rng);
    LstmParams tgt = LstmParams::create(store, "frameid/tgt", 2 * h, h, rng);
    Parameter& lus = store.add_uniform("frameid/lus", {num_lus + 1, cfg.dim_lu}, rng);
    Parameter& w3 = store.add_uniform("frameid/w3", {num_frames}, rng);
    Parameter& w4 = store.add_uniform("frameid/w4", {num_frames, h + cfg.dim_lu}, rng);
    return FrameIdParams{words, pos, tok_fwd, tok_bwd, tgt, lus, w3, w4, pretrained_dim};
  }
};

// biLSTM over [word; pretrained; POS]. One pass per sentence; every target in
// the sentence reuses the same states.
inline std::vector<Node> frameid_encode_tokens(Graph& g, const FrameIdParams& p,
                                               const TokenIds& ids,
                                               const PretrainedTable* pretrained,
                                               const std::vector<Tensor>* input_masks = nullptr) {
  const int n = ids.n();
  if (n == 0) throw error("frameid_encode_tokens: empty sentence");
  if (input_masks && static_cast<int>(input_masks->size()) != n)
    throw error("frameid_encode_tokens: one dropout mask per token required");
  std::vector<Node> inputs;
  inputs.reserve(n);
  for (int q = 0; q < n; ++q) {
    std::vector<Node> parts;
    parts.push_back(g.lookup(p.word_table, ids.word[q]));
    if (p.pretrained_dim > 0) {
      if (!pretrained) throw error("frameid_encode_tokens: model expects pretrained vectors");
      parts.push_back(g.lookup_const(pretrained->table, ids.pretrained[q]));
    }
    parts.push_back(g.lookup(p.pos_table, ids.pos[q]));
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

// u_t: forward LSTM over the token states from one before the target to one
// after, clipped at the sentence edges.
inline Node frameid_target_vector(Graph& g, const FrameIdParams& p,
                                  const std::vector<Node>& h_tok, int target_start,
                                  int target_end) {
  const int n = static_cast<int>(h_tok.size());
  if (target_start < 0 || target_start > target_end || target_end >= n)
    throw error(detail::cat("frameid_target_vector: target [", target_start, ",", target_end,
                            "] out of bounds for n=", n));
  const int lo = std::max(0, target_start - 1);
  const int hi = std::min(n - 1, target_end + 1);
  LstmState st = lstm_initial(g, p.tgt);
  for (int q = lo; q <= hi; ++q) st = lstm_step(g, p.tgt, h_tok[q], st);
  return st.h;
}

// Frames the lexical unit may evoke, in ontology order. An unseen unit gets
// the whole inventory.
inline std::vector<int> frame_candidates(const FrameOntology& onto, int lu_id) {
  if (lu_id >= static_cast<int>(onto.lu_names.size()))
    throw error(detail::cat("frame_candidates: bad lu id ", lu_id));
  if (lu_id < 0) {
    std::vector<int> all(onto.frame_names.size());
    for (size_t f = 0; f < all.size(); ++f) all[f] = static_cast<int>(f);
    return all;
  }
  return onto.lu_frames[lu_id];
}

inline std::vector<Node> frame_scores(Graph& g, const FrameIdParams& p, Node u_t, int lu_id,
                                      const std::vector<int>& candidates) {
  if (candidates.empty()) throw error("frame_scores: empty candidate set");
  Node u_l = g.lookup(p.lu_table, lu_id + 1);
  Node u = g.concat({u_t, u_l});
  std::vector<Node> scores;
  scores.reserve(candidates.size());
  for (int f : candidates) {
    Node w3f = g.pick(g.parameter(p.w3), f);
    Node hidden = g.relu(g.dot(g.lookup(p.w4, f), u));
    scores.push_back(g.cmult(w3f, hidden));
  }
  return scores;
}

inline std::vector<double> frame_posterior(const Graph& g, const std::vector<Node>& scores) {
  if (scores.empty()) throw error("frame_posterior: no scores");
  std::vector<double> v(scores.size());
  double m = -std::numeric_limits<double>::infinity();
  for (size_t k = 0; k < scores.size(); ++k) {
    v[k] = g.scalar_value(scores[k]);
    m = std::max(m, v[k]);
  }
  double total = 0.0;
  for (double& x : v) {
    x = std::exp(x - m);
    total += x;
  }
  for (double& x : v) x /= total;
  return v;
}

inline int candidate_index(const std::vector<int>& candidates, int frame) {
  for (size_t k = 0; k < candidates.size(); ++k)
    if (candidates[k] == frame) return static_cast<int>(k);
  return -1;
}

inline Node frameid_loss(Graph& g, const std::vector<Node>& scores, int gold_pos) {
  if (gold_pos < 0 || gold_pos >= static_cast<int>(scores.size()))
    throw error(detail::cat("frameid_loss: gold position ", gold_pos, " outside candidate set"));
  return g.sub(g.logsumexp(scores), scores[gold_pos]);
}

// Ensemble decision: add the members' scores, then take the argmax. Ties go
// to the candidate listed first. Every member must score the same candidates.
inline int ensemble_frame_choice(const std::vector<std::vector<double>>& member_scores) {
  if (member_scores.empty()) throw error("ensemble_frame_choice: no members");
  size_t width = member_scores[0].size();
  if (width == 0) throw error("ensemble_frame_choice: empty candidate set");
  for (const auto& m : member_scores)
    if (m.size() != width)
      throw error(detail::cat("ensemble_frame_choice: candidate sets disagree (", m.size(),
                              " vs ", width, ")"));
  int best = 0;
  double best_total = -std::numeric_limits<double>::infinity();
  for (size_t k = 0; k < width; ++k) {
    double total = 0.0;
    for (const auto& m : member_scores) total += m[k];
    if (total > best_total) {
      best_total = total;
      best = static_cast<int>(k);
    }
  }
  return best;
}

}  // namespace framespan
