#pragma once

// Segment scoring: phi(s, x) for a labeled span <i, j, y> given the encoded
// sentence and the target/frame context. One hidden layer, rectifier, no
// biases. The only span-position information reaching the scorer is the span
// embedding and the 13-dim feature block mu (binned length + position
// relative to the target).

#include <vector>

#include "framespan/autodiff.hpp"
#include "framespan/corpus.hpp"
#include "framespan/encoders.hpp"
#include "framespan/error.hpp"
#include "framespan/segmentation.hpp"

namespace framespan {

constexpr int kNumLengthBins = 9;
constexpr int kNumRelPositions = 4;
constexpr int kSegmentFeatureDim = kNumLengthBins + kNumRelPositions;

// Bins: 1, 2, 3, 4, 5, 6-7, 8-11, 12-15, 16+.
inline int length_bin(int len) {
  if (len < 1) throw error(detail::cat("length_bin: nonpositive length ", len));
  if (len <= 5) return len - 1;
  if (len <= 7) return 5;
  if (len <= 11) return 6;
  if (len <= 15) return 7;
  return 8;
}

enum class RelPosition { kBefore = 0, kAfter = 1, kOverlapping = 2, kWithin = 3 };

// Position of span [i, j] relative to the target [ts, te]. Spans strictly
// containing the target count as overlapping, not within.
inline RelPosition relative_position(int i, int j, int ts, int te) {
  if (j < ts) return RelPosition::kBefore;
  if (i > te) return RelPosition::kAfter;
  if (i >= ts && j <= te) return RelPosition::kWithin;
  return RelPosition::kOverlapping;
}

inline Tensor segment_features(int i, int j, int ts, int te) {
  if (i < 0 || j < i) throw error(detail::cat("segment_features: bad span [", i, ", ", j, "]"));
  Tensor mu({kSegmentFeatureDim});
  mu.v[length_bin(j - i + 1)] = 1.0;
  int rel = static_cast<int>(relative_position(i, j, ts, te));
  mu.v[kNumLengthBins + rel] = 1.0;
  return mu;
}

struct SegmentScorerParams {
  Parameter& w1;
  Parameter& w2;

  static SegmentScorerParams create(ParameterStore& store, const Config& cfg, Rng& rng) {
    int span_dim = 2 * cfg.hidden_size;
    int vs_dim = span_dim + cfg.dim_role + kSegmentFeatureDim;
    int vflt_dim = cfg.dim_frame + cfg.dim_lu + cfg.hidden_size;
    Parameter& w1 = store.add_uniform("scorer/W1", {cfg.hidden_size, vs_dim + vflt_dim}, rng);
    Parameter& w2 = store.add_uniform("scorer/w2", {cfg.hidden_size}, rng);
    return SegmentScorerParams{w1, w2};
  }
};

// v_s = [span embedding; role embedding; mu]. The role index y is the
// frame-local label (0 = null), mapped onto the shared role table.
inline Node segment_repr(Graph& g, const EncoderParams& enc, const FrameOntology& onto,
                         const SpanTable& spans, int frame_id, const Segment& seg,
                         int target_start, int target_end) {
  if (seg.y < 0 || seg.y >= onto.num_labels(frame_id))
    throw data_error(detail::cat("segment_repr: label ", seg.y, " out of range for frame ",
                                 onto.frame_names[frame_id]));
  Node span = spans.at(seg.i, seg.j);
  Node role = role_embedding(g, enc, onto.role_row(frame_id, seg.y));
  Node mu = g.input(segment_features(seg.i, seg.j, target_start, target_end));
  return g.concat({span, role, mu});
}

// v_{f,l,t} = [frame embedding; LU embedding; target encoding]. Shared by
// every segment of one (sentence, target) instance.
inline Node target_frame_repr(Graph& g, const EncoderParams& enc,
                              const std::vector<Node>& h_tok, int frame_id, int lu_id,
                              int target_start, int target_end) {
  auto [v_f, v_l] = lookup_frame_lu(g, enc, frame_id, lu_id);
  Node v_t = encode_target(g, enc, h_tok, target_start, target_end);
  return g.concat({v_f, v_l, v_t});
}

inline Node phi_score(Graph& g, const SegmentScorerParams& p, Node v_s, Node v_flt) {
  Node in = g.concat({v_s, v_flt});
  Node hidden = g.relu(g.matvec(g.parameter(p.w1), in));
  return g.dot(g.parameter(p.w2), hidden);
}

}  // namespace framespan
