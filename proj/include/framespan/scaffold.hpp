#pragma once

// Syntactic scaffold: a binary constituency classifier over the same span
// embeddings the argument scorer consumes. Its only purpose is to push
// gradient into the shared encoders during training; it never touches
// prediction.

#include <algorithm>
#include <utility>
#include <vector>

#include "framespan/autodiff.hpp"
#include "framespan/encoders.hpp"
#include "framespan/error.hpp"

namespace framespan {

struct ScaffoldParams {
  Parameter& w1;
  Parameter& w2;
  Parameter& label_table;  // two rows: non-constituent, constituent

  static ScaffoldParams create(ParameterStore& store, const Config& cfg, Rng& rng) {
    int in_dim = 2 * cfg.hidden_size + cfg.dim_scaffold_label;
    Parameter& w1 = store.add_uniform("scaffold/W1", {cfg.hidden_size, in_dim}, rng);
    Parameter& w2 = store.add_uniform("scaffold/w2", {cfg.hidden_size}, rng);
    Parameter& labels = store.add_uniform("scaffold/labels", {2, cfg.dim_scaffold_label}, rng);
    return ScaffoldParams{w1, w2, labels};
  }
};

inline Node psi_score(Graph& g, const ScaffoldParams& p, Node span, int r) {
  if (r < 0 || r > 1) throw error(detail::cat("psi_score: label must be 0 or 1, got ", r));
  Node in = g.concat({span, g.lookup(p.label_table, r)});
  return g.dot(g.parameter(p.w2), g.relu(g.matvec(g.parameter(p.w1), in)));
}

inline Node scaffold_positive_prob(Graph& g, const ScaffoldParams& p, Node span) {
  return g.logistic(g.sub(psi_score(g, p, span, 1), psi_score(g, p, span, 0)));
}

// Summed binary log loss over every span in the table. positives must be
// sorted (i, j) pairs; spans longer than the table's bound never enter.
inline Node scaffold_loss(Graph& g, const ScaffoldParams& p, const SpanTable& spans,
                          const std::vector<std::pair<int, int>>& positives) {
  std::vector<Node> terms;
  for (int i = 0; i < spans.n; ++i) {
    for (int j = i; j < spans.n && spans.has(i, j); ++j) {
      bool pos = std::binary_search(positives.begin(), positives.end(), std::make_pair(i, j));
      Node psi0 = psi_score(g, p, spans.at(i, j), 0);
      Node psi1 = psi_score(g, p, spans.at(i, j), 1);
      Node lse = g.logsumexp({psi0, psi1});
      terms.push_back(g.sub(lse, pos ? psi1 : psi0));
    }
  }
  return g.sum(terms);
}

// Per-instance multitask objective. Treebank sentences carry no argument
// annotation, so arg_loss may be null.
inline Node joint_loss(Graph& g, const Node* arg_loss, Node scaffold, double delta) {
  Node scaled = g.scale(scaffold, delta);
  return arg_loss ? g.add(*arg_loss, scaled) : scaled;
}

}  // namespace framespan
