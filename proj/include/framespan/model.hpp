#pragma once

// Full argument model: shared encoders, segment scorer, and scaffold head in
// one parameter store, plus the per-instance graph assembly used by both the
// training loss and the decoder.

#include <vector>

#include "framespan/autodiff.hpp"
#include "framespan/config.hpp"
#include "framespan/corpus.hpp"
#include "framespan/encoders.hpp"
#include "framespan/scaffold.hpp"
#include "framespan/segment_scorer.hpp"
#include "framespan/semimarkov.hpp"

namespace framespan {

struct ArgModel {
  EncoderParams enc;
  SegmentScorerParams scorer;
  ScaffoldParams scaffold;

  static ArgModel create(ParameterStore& store, const Config& cfg, const Vocabulary& vocab,
                         const FrameOntology& onto, int pretrained_dim, Rng& rng) {
    EncoderParams enc = EncoderParams::create(
        store, cfg, static_cast<int>(vocab.words.size()), static_cast<int>(vocab.pos_tags.size()),
        static_cast<int>(onto.frame_names.size()), static_cast<int>(onto.lu_names.size()),
        static_cast<int>(onto.role_names.size()), pretrained_dim, rng);
    SegmentScorerParams scorer = SegmentScorerParams::create(store, cfg, rng);
    ScaffoldParams scaffold = ScaffoldParams::create(store, cfg, rng);
    return ArgModel{enc, scorer, scaffold};
  }
};

// Everything one instance's graph exposes: token states, the span table
// (shared with the scaffold), and the phi lattice.
struct ArgGraphParts {
  std::vector<Node> h_tok;
  SpanTable spans;
  ScoreLattice lattice;
};

inline ArgGraphParts build_arg_parts(Graph& g, const ArgModel& m, const Config& cfg,
                                     const FrameOntology& onto, const PretrainedTable* pretrained,
                                     const TokenIds& ids, int frame_id, int lu_id,
                                     int target_start, int target_end,
                                     const std::vector<Tensor>* input_masks = nullptr) {
  ArgGraphParts parts;
  parts.h_tok = encode_tokens(g, m.enc, cfg, ids, pretrained, target_start, input_masks);
  parts.spans = encode_spans(g, m.enc, parts.h_tok, cfg.max_span_length);
  Node v_flt = target_frame_repr(g, m.enc, parts.h_tok, frame_id, lu_id, target_start, target_end);

  const int n = ids.n();
  const int num_labels = onto.num_labels(frame_id);
  parts.lattice = ScoreLattice::empty(n, cfg.max_span_length, num_labels);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n && j - i + 1 <= cfg.max_span_length; ++j) {
      for (int y = 0; y < num_labels; ++y) {
        Node v_s = segment_repr(g, m.enc, onto, parts.spans, frame_id, Segment{i, j, y},
                                target_start, target_end);
        parts.lattice.set(i, j, y, phi_score(g, m.scorer, v_s, v_flt));
      }
    }
  }
  return parts;
}

// Argument loss of one annotated instance, no scaffold term.
inline Node arg_instance_loss(Graph& g, const ArgGraphParts& parts, const ArgInstance& inst,
                              const Config& cfg) {
  return softmax_margin_loss(g, parts.lattice, inst.gold, cfg.alpha,
                             numerator_mode_from(cfg.numerator_mode));
}

inline Segmentation decode_instance(const Graph& g, const ArgGraphParts& parts) {
  return viterbi(materialize(g, parts.lattice));
}

// Span states for a scaffold-only sentence: same encoders, no target anywhere
// in the sentence, no lattice.
inline SpanTable build_scaffold_spans(Graph& g, const ArgModel& m, const Config& cfg,
                                      const PretrainedTable* pretrained, const TokenIds& ids,
                                      const std::vector<Tensor>* input_masks = nullptr) {
  std::vector<Node> h_tok = encode_tokens(g, m.enc, cfg, ids, pretrained, kNoTarget, input_masks);
  return encode_spans(g, m.enc, h_tok, cfg.max_span_length);
}

}  // namespace framespan
