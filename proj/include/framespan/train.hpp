#pragma once

// Training loops. One sentence-level instance per update: build the graph,
// backprop, clip, Adam step. Dev metric after every epoch; the best epoch's
// weights are what the caller keeps. Two random streams: the caller's init
// seed fixed the parameters already, the data stream here drives shuffling,
// UNK replacement, and dropout so ensemble members see identical data.

#include <cmath>
#include <iostream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "framespan/checkpoint.hpp"
#include "framespan/frameid.hpp"
#include "framespan/metrics.hpp"
#include "framespan/model.hpp"
#include "framespan/optim.hpp"

namespace framespan {

struct TrainResult {
  double best_metric = -1.0;
  int best_epoch = -1;
  long updates = 0;  // optimizer steps taken
  std::vector<double> epoch_losses;  // summed training loss per epoch
  std::vector<double> dev_metrics;   // aligned with epochs, entry 0 = untrained
};

namespace detail {

inline std::vector<Tensor> make_masks(int n, int dim, double rate, Rng& rng) {
  std::vector<Tensor> masks;
  masks.reserve(n);
  for (int q = 0; q < n; ++q) masks.push_back(dropout_mask({dim}, rate, rng));
  return masks;
}

inline TokenIds train_ids(const Vocabulary& vocab, const PretrainedTable* pre,
                          const std::vector<std::string>& tokens,
                          const std::vector<std::string>& pos, double unk_prob, Rng& rng) {
  TokenIds ids;
  ids.word = apply_unk_policy(vocab, tokens, unk_prob, rng);
  ids.pretrained.reserve(tokens.size());
  for (size_t q = 0; q < tokens.size(); ++q) {
    bool flipped = ids.word[q] == Vocabulary::kUnkWord && vocab.word_id(tokens[q]) != Vocabulary::kUnkWord;
    ids.pretrained.push_back(pre && !flipped ? pre->row_of(tokens[q]) : 0);
  }
  ids.pos.reserve(pos.size());
  for (const auto& p : pos) ids.pos.push_back(vocab.pos_id(p));
  return ids;
}

}  // namespace detail

inline EvalReport evaluate_arg_model(const ArgModel& model, const Config& cfg,
                                     const Vocabulary& vocab, const FrameOntology& onto,
                                     const PretrainedTable* pretrained,
                                     const std::vector<ArgInstance>& dev) {
  std::vector<std::vector<Segment>> pred, gold;
  for (const ArgInstance& inst : dev) {
    Graph g;
    TokenIds ids = make_token_ids(vocab, pretrained, inst.tokens, inst.pos);
    ArgGraphParts parts = build_arg_parts(g, model, cfg, onto, pretrained, ids, inst.frame_id,
                                          inst.lu_id, inst.target_start, inst.target_end);
    pred.push_back(decode_instance(g, parts).segments);
    gold.push_back(inst.gold);
  }
  return score_arguments(pred, gold);
}

// Joint argument + scaffold training. train_positives must be aligned with
// train (constituent spans of each instance's sentence) or empty to drop the
// scaffold term from annotated sentences. scaffold_only carries treebank
// sentences, which contribute delta * scaffold_loss alone.
inline TrainResult train_arg(ParameterStore& store, const ArgModel& model, const Config& cfg,
                             const Vocabulary& vocab, const FrameOntology& onto,
                             const PretrainedTable* pretrained,
                             const std::vector<ArgInstance>& train,
                             const std::vector<std::vector<std::pair<int, int>>>& train_positives,
                             const std::vector<ScaffoldInstance>& scaffold_only,
                             const std::vector<ArgInstance>& dev, std::ostream* log = nullptr) {
  if (!train_positives.empty() && train_positives.size() != train.size())
    throw error("train_arg: one positive-span list per training instance required");
  if (train.empty() && scaffold_only.empty())
    throw data_error("train_arg: no training instances");
  for (const ArgInstance& inst : train)
    if (inst.lu_id < 0)
      throw data_error(detail::cat("train_arg: instance ", inst.id,
                                   ": lexical unit missing from the ontology"));

  const int tok_dim = cfg.dim_word + (pretrained ? pretrained->dim : 0) + cfg.dim_pos +
                      cfg.dim_distance;
  Rng data_rng(cfg.data_seed);
  Adam adam(AdamConfig{cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps});
  auto params = store.all();

  TrainResult res;
  res.dev_metrics.push_back(
      dev.empty() ? 0.0 : evaluate_arg_model(model, cfg, vocab, onto, pretrained, dev).f1());
  res.best_metric = res.dev_metrics[0];
  res.best_epoch = 0;
  std::map<std::string, Tensor> best = snapshot_parameters(store);
  if (log) *log << "epoch 0 dev_f1 " << res.dev_metrics[0] << "\n";

  struct Item {
    bool is_arg;
    size_t index;
  };
  std::vector<Item> items;
  for (size_t k = 0; k < train.size(); ++k) items.push_back({true, k});
  for (size_t k = 0; k < scaffold_only.size(); ++k) items.push_back({false, k});

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    data_rng.shuffle(items);
    double total_loss = 0.0;
    for (const Item& item : items) {
      Graph g;
      Node loss;
      if (item.is_arg) {
        const ArgInstance& inst = train[item.index];
        TokenIds ids =
            detail::train_ids(vocab, pretrained, inst.tokens, inst.pos, cfg.unk_prob, data_rng);
        std::vector<Tensor> masks;
        if (cfg.dropout > 0) masks = detail::make_masks(inst.n(), tok_dim, cfg.dropout, data_rng);
        ArgGraphParts parts =
            build_arg_parts(g, model, cfg, onto, pretrained, ids, inst.frame_id, inst.lu_id,
                            inst.target_start, inst.target_end, masks.empty() ? nullptr : &masks);
        Node arg_loss = arg_instance_loss(g, parts, inst, cfg);
        if (cfg.delta > 0 && !train_positives.empty()) {
          Node sc = scaffold_loss(g, model.scaffold, parts.spans, train_positives[item.index]);
          loss = joint_loss(g, &arg_loss, sc, cfg.delta);
        } else {
          loss = arg_loss;
        }
      } else {
        const ScaffoldInstance& inst = scaffold_only[item.index];
        TokenIds ids =
            detail::train_ids(vocab, pretrained, inst.tokens, inst.pos, cfg.unk_prob, data_rng);
        std::vector<Tensor> masks;
        if (cfg.dropout > 0)
          masks = detail::make_masks(static_cast<int>(inst.tokens.size()), tok_dim, cfg.dropout,
                                     data_rng);
        SpanTable spans = build_scaffold_spans(g, model, cfg, pretrained, ids,
                                               masks.empty() ? nullptr : &masks);
        Node sc = scaffold_loss(g, model.scaffold, spans, inst.positive_spans);
        loss = joint_loss(g, nullptr, sc, cfg.delta);
      }
      double val = g.scalar_value(loss);
      if (!std::isfinite(val))
        throw numeric_error(detail::cat("train_arg: non-finite loss at epoch ", epoch));
      total_loss += val;
      store.zero_grads();
      g.backward(loss);
      clip_gradients(params, cfg.clip_norm);
      adam.step(params);
      ++res.updates;
    }
    res.epoch_losses.push_back(total_loss);
    double metric =
        dev.empty() ? 0.0 : evaluate_arg_model(model, cfg, vocab, onto, pretrained, dev).f1();
    res.dev_metrics.push_back(metric);
    if (log)
      *log << "epoch " << epoch << " train_loss " << total_loss << " dev_f1 " << metric << "\n";
    if (metric > res.best_metric) {
      res.best_metric = metric;
      res.best_epoch = epoch;
      best = snapshot_parameters(store);
    }
    if (!dev.empty() && res.best_metric >= 1.0) break;
  }

  // without a dev set there is nothing to select on; keep the final weights
  if (!dev.empty())
    for (Parameter* p : params) p->value = best.at(p->name);
  return res;
}

inline double evaluate_frame_model(const FrameIdParams& model, const Vocabulary& vocab,
                                   const FrameOntology& onto, const PretrainedTable* pretrained,
                                   const std::vector<ArgInstance>& dev) {
  std::vector<int> pred, gold;
  for (const ArgInstance& inst : dev) {
    Graph g;
    TokenIds ids = make_token_ids(vocab, pretrained, inst.tokens, inst.pos);
    std::vector<Node> h_tok = frameid_encode_tokens(g, model, ids, pretrained);
    Node u_t = frameid_target_vector(g, model, h_tok, inst.target_start, inst.target_end);
    std::vector<int> cands = frame_candidates(onto, inst.lu_id);
    std::vector<Node> scores = frame_scores(g, model, u_t, inst.lu_id, cands);
    std::vector<double> vals(scores.size());
    for (size_t k = 0; k < scores.size(); ++k) vals[k] = g.scalar_value(scores[k]);
    pred.push_back(cands[ensemble_frame_choice({vals})]);
    gold.push_back(inst.frame_id);
  }
  return score_frames(pred, gold).accuracy();
}

inline TrainResult train_frame(ParameterStore& store, const FrameIdParams& model,
                               const Config& cfg, const Vocabulary& vocab,
                               const FrameOntology& onto, const PretrainedTable* pretrained,
                               const std::vector<ArgInstance>& train,
                               const std::vector<ArgInstance>& dev, std::ostream* log = nullptr) {
  // instances whose gold frame the lexicon cannot propose teach nothing
  std::vector<const ArgInstance*> usable;
  for (const ArgInstance& inst : train) {
    std::vector<int> cands = frame_candidates(onto, inst.lu_id);
    if (candidate_index(cands, inst.frame_id) < 0) {
      if (log)
        *log << "skipping " << inst.id << ": gold frame outside the lexical unit's candidates\n";
      continue;
    }
    usable.push_back(&inst);
  }
  if (usable.empty()) throw data_error("train_frame: no trainable instances");

  const int tok_dim = cfg.dim_word + (pretrained ? pretrained->dim : 0) + cfg.dim_pos;
  Rng data_rng(cfg.data_seed);
  Adam adam(AdamConfig{cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps});
  auto params = store.all();

  TrainResult res;
  res.dev_metrics.push_back(
      dev.empty() ? 0.0 : evaluate_frame_model(model, vocab, onto, pretrained, dev));
  res.best_metric = res.dev_metrics[0];
  res.best_epoch = 0;
  std::map<std::string, Tensor> best = snapshot_parameters(store);
  if (log) *log << "epoch 0 dev_acc " << res.dev_metrics[0] << "\n";
  if (!dev.empty() && res.best_metric >= 1.0) {
    for (Parameter* p : params) p->value = best.at(p->name);
    return res;
  }

  std::vector<size_t> order(usable.size());
  for (size_t k = 0; k < order.size(); ++k) order[k] = k;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    data_rng.shuffle(order);
    double total_loss = 0.0;
    for (size_t k : order) {
      const ArgInstance& inst = *usable[k];
      Graph g;
      TokenIds ids =
          detail::train_ids(vocab, pretrained, inst.tokens, inst.pos, cfg.unk_prob, data_rng);
      std::vector<Tensor> masks;
      if (cfg.dropout > 0) masks = detail::make_masks(inst.n(), tok_dim, cfg.dropout, data_rng);
      std::vector<Node> h_tok =
          frameid_encode_tokens(g, model, ids, pretrained, masks.empty() ? nullptr : &masks);
      Node u_t = frameid_target_vector(g, model, h_tok, inst.target_start, inst.target_end);
      std::vector<int> cands = frame_candidates(onto, inst.lu_id);
      std::vector<Node> scores = frame_scores(g, model, u_t, inst.lu_id, cands);
      Node loss = frameid_loss(g, scores, candidate_index(cands, inst.frame_id));
      double val = g.scalar_value(loss);
      if (!std::isfinite(val))
        throw numeric_error(detail::cat("train_frame: non-finite loss at epoch ", epoch));
      total_loss += val;
      store.zero_grads();
      g.backward(loss);
      clip_gradients(params, cfg.clip_norm);
      adam.step(params);
      ++res.updates;
    }
    res.epoch_losses.push_back(total_loss);
    double metric =
        dev.empty() ? 0.0 : evaluate_frame_model(model, vocab, onto, pretrained, dev);
    res.dev_metrics.push_back(metric);
    if (log)
      *log << "epoch " << epoch << " train_loss " << total_loss << " dev_acc " << metric << "\n";
    if (metric > res.best_metric) {
      res.best_metric = metric;
      res.best_epoch = epoch;
      best = snapshot_parameters(store);
    }
    if (!dev.empty() && res.best_metric >= 1.0) break;
  }

  if (!dev.empty())
    for (Parameter* p : params) p->value = best.at(p->name);
  return res;
}

}  // namespace framespan
