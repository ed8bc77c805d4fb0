#pragma once

// Semi-Markov argument layer: every candidate segmentation tiles the sentence
// with labeled spans of length <= b. Partition and numerator run in log space
// over graph nodes so gradients flow back into the scorer; decoding runs on a
// plain double lattice.

#include <algorithm>
#include <string>
#include <vector>

#include "framespan/autodiff.hpp"
#include "framespan/error.hpp"
#include "framespan/segmentation.hpp"

namespace framespan {

// phi nodes for all spans (i, j) with j - i + 1 <= b and labels 0..L-1.
struct ScoreLattice {
  int n = 0;
  int b = 0;
  int num_labels = 0;
  std::vector<Node> cells;

  static ScoreLattice empty(int n, int b, int num_labels) {
    if (n < 1) throw error("ScoreLattice: sentence must be nonempty");
    if (b < 1 || num_labels < 1)
      throw error(detail::cat("ScoreLattice: bad dims b=", b, " labels=", num_labels));
    ScoreLattice lat;
    lat.n = n;
    lat.b = b;
    lat.num_labels = num_labels;
    lat.cells.assign(static_cast<size_t>(n) * n * num_labels, Node{});
    return lat;
  }

  size_t idx(int i, int j, int y) const {
    return (static_cast<size_t>(i) * n + j) * num_labels + y;
  }
  bool has(int i, int j) const { return i >= 0 && i <= j && j < n && j - i + 1 <= b; }
  void set(int i, int j, int y, Node node) { cells[idx(i, j, y)] = node; }
  Node at(int i, int j, int y) const {
    if (!has(i, j) || y < 0 || y >= num_labels)
      throw error(detail::cat("ScoreLattice: no cell (", i, ",", j, ",", y, ")"));
    Node nd = cells[idx(i, j, y)];
    if (nd.id < 0) throw error(detail::cat("ScoreLattice: cell (", i, ",", j, ",", y, ") unset"));
    return nd;
  }
};

// Same shape holding raw scores, used at decode time and for ensembling.
struct NumLattice {
  int n = 0;
  int b = 0;
  int num_labels = 0;
  std::vector<double> cells;

  static NumLattice zeros(int n, int b, int num_labels) {
    if (n < 1) throw error("NumLattice: sentence must be nonempty");
    NumLattice lat;
    lat.n = n;
    lat.b = b;
    lat.num_labels = num_labels;
    lat.cells.assign(static_cast<size_t>(n) * n * num_labels, 0.0);
    return lat;
  }

  size_t idx(int i, int j, int y) const {
    return (static_cast<size_t>(i) * n + j) * num_labels + y;
  }
  bool has(int i, int j) const { return i >= 0 && i <= j && j < n && j - i + 1 <= b; }
  double at(int i, int j, int y) const { return cells[idx(i, j, y)]; }
  double& at(int i, int j, int y) { return cells[idx(i, j, y)]; }

  NumLattice& operator+=(const NumLattice& o) {
    if (n != o.n || b != o.b || num_labels != o.num_labels)
      throw error("NumLattice: shape mismatch in sum");
    for (size_t k = 0; k < cells.size(); ++k) cells[k] += o.cells[k];
    return *this;
  }
};

inline NumLattice materialize(const Graph& g, const ScoreLattice& lat) {
  NumLattice out = NumLattice::zeros(lat.n, lat.b, lat.num_labels);
  for (int i = 0; i < lat.n; ++i)
    for (int j = i; j < lat.n && lat.has(i, j); ++j)
      for (int y = 0; y < lat.num_labels; ++y) out.at(i, j, y) = g.scalar_value(lat.at(i, j, y));
  return out;
}

namespace detail {

inline void validate_gold(const std::vector<Segment>& gold, int n, int b) {
  int prev_end = -1;
  for (const Segment& s : gold) {
    if (s.y == kNullLabel)
      throw error(detail::cat("gold segment [", s.i, ",", s.j, "] has the null label"));
    if (s.i < 0 || s.j < s.i || s.j >= n)
      throw error(detail::cat("gold segment [", s.i, ",", s.j, "] out of bounds for n=", n));
    if (s.length() > b)
      throw error(detail::cat("gold segment [", s.i, ",", s.j, "] exceeds max length ", b));
    if (s.i <= prev_end)
      throw error(detail::cat("gold segments must be sorted and disjoint near [", s.i, ",", s.j, "]"));
    prev_end = s.j;
  }
}

}  // namespace detail

// Cost of one predicted segment against the gold argument set: exact matches
// are free, any other non-null prediction pays 1, and every gold argument
// whose start token falls inside the span pays alpha (a recall miss, since
// that argument cannot be matched elsewhere).
inline double span_cost(const Segment& seg, const std::vector<Segment>& gold_nonnull,
                        double alpha) {
  for (const Segment& gs : gold_nonnull)
    if (gs == seg) return 0.0;
  double c = seg.y == kNullLabel ? 0.0 : 1.0;
  for (const Segment& gs : gold_nonnull)
    if (gs.i >= seg.i && gs.i <= seg.j) c += alpha;
  return c;
}

inline double segmentation_cost(const Segmentation& pred, const std::vector<Segment>& gold_nonnull,
                                double alpha) {
  double c = 0.0;
  for (const Segment& s : pred.segments) c += span_cost(s, gold_nonnull, alpha);
  return c;
}

// log of the (cost-augmented) partition over all segmentations. With gold
// present and alpha > 0 each segment's score is shifted by its span cost;
// otherwise this is the plain partition.
inline Node log_partition(Graph& g, const ScoreLattice& lat,
                          const std::vector<Segment>* gold_nonnull, double alpha) {
  if (lat.n < 1) throw error("log_partition: empty lattice");
  const bool with_cost = gold_nonnull != nullptr && alpha > 0.0;
  if (gold_nonnull) detail::validate_gold(*gold_nonnull, lat.n, lat.b);

  std::vector<Node> z(lat.n + 1);
  z[0] = g.constant(0.0);
  for (int e = 1; e <= lat.n; ++e) {
    int j = e - 1;
    std::vector<Node> cands;
    for (int i = j; i >= 0 && j - i + 1 <= lat.b; --i) {
      for (int y = 0; y < lat.num_labels; ++y) {
        Node term = g.add(z[i], lat.at(i, j, y));
        if (with_cost) {
          double c = span_cost(Segment{i, j, y}, *gold_nonnull, alpha);
          if (c != 0.0) term = g.add_const(term, c);
        }
        cands.push_back(term);
      }
    }
    z[e] = g.logsumexp(cands);
  }
  return z[lat.n];
}

enum class NumeratorMode { kMarginal, kCanonical };

inline NumeratorMode numerator_mode_from(const std::string& s) {
  if (s == "marginal") return NumeratorMode::kMarginal;
  if (s == "canonical") return NumeratorMode::kCanonical;
  throw data_error(detail::cat("unknown numerator_mode '", s, "'"));
}

// log-score of the gold annotation. Gold fixes the non-null segments only;
// in marginal mode the gaps between them are summed over every null tiling,
// in canonical mode the gaps are chunked greedily left to right.
inline Node constrained_log_numerator(Graph& g, const ScoreLattice& lat,
                                      const std::vector<Segment>& gold_nonnull,
                                      NumeratorMode mode) {
  if (lat.n < 1) throw error("constrained_log_numerator: empty lattice");
  detail::validate_gold(gold_nonnull, lat.n, lat.b);

  if (mode == NumeratorMode::kCanonical) {
    Segmentation tiling = canonical_tiling(gold_nonnull, lat.n, lat.b);
    std::vector<Node> parts;
    for (const Segment& s : tiling.segments) parts.push_back(lat.at(s.i, s.j, s.y));
    return g.sum(parts);
  }

  // marginal: the usual DP restricted to segments consistent with gold
  auto gold_at = [&](int i, int j, int y) {
    for (const Segment& s : gold_nonnull)
      if (s.i == i && s.j == j && s.y == y) return true;
    return false;
  };
  auto overlaps_gold = [&](int i, int j) {
    for (const Segment& s : gold_nonnull)
      if (s.i <= j && i <= s.j) return true;
    return false;
  };

  std::vector<Node> z(lat.n + 1, Node{});
  std::vector<bool> reachable(lat.n + 1, false);
  z[0] = g.constant(0.0);
  reachable[0] = true;
  for (int e = 1; e <= lat.n; ++e) {
    int j = e - 1;
    std::vector<Node> cands;
    for (int i = j; i >= 0 && j - i + 1 <= lat.b; --i) {
      if (!reachable[i]) continue;
      for (int y = 0; y < lat.num_labels; ++y) {
        bool ok = y == kNullLabel ? !overlaps_gold(i, j) : gold_at(i, j, y);
        if (ok) cands.push_back(g.add(z[i], lat.at(i, j, y)));
      }
    }
    if (!cands.empty()) {
      z[e] = g.logsumexp(cands);
      reachable[e] = true;
    }
  }
  if (!reachable[lat.n]) throw error("constrained_log_numerator: gold admits no segmentation");
  return z[lat.n];
}

// softmax-margin objective: log of the cost-augmented partition minus the
// log-score of gold. Nonnegative; alpha = 0 reduces to the negative
// log-likelihood.
inline Node softmax_margin_loss(Graph& g, const ScoreLattice& lat,
                                const std::vector<Segment>& gold_nonnull, double alpha,
                                NumeratorMode mode) {
  Node num = constrained_log_numerator(g, lat, gold_nonnull, mode);
  Node z = log_partition(g, lat, &gold_nonnull, alpha);
  return g.sub(z, num);
}

// MAP segmentation. Ties break toward the candidate visited first: for each
// end position, shorter segments before longer ones and the null label before
// the frame's roles, replacing the incumbent only on strict improvement.
inline Segmentation viterbi(const NumLattice& lat) {
  if (lat.n < 1) throw error("viterbi: empty lattice");
  std::vector<double> best(lat.n + 1, 0.0);
  std::vector<int> back_i(lat.n + 1, -1), back_y(lat.n + 1, -1);
  for (int e = 1; e <= lat.n; ++e) {
    int j = e - 1;
    bool first = true;
    for (int i = j; i >= 0 && j - i + 1 <= lat.b; --i) {
      for (int y = 0; y < lat.num_labels; ++y) {
        double cand = best[i] + lat.at(i, j, y);
        if (first || cand > best[e]) {
          best[e] = cand;
          back_i[e] = i;
          back_y[e] = y;
          first = false;
        }
      }
    }
  }
  Segmentation out;
  for (int e = lat.n; e > 0; e = back_i[e])
    out.segments.push_back(Segment{back_i[e], e - 1, back_y[e]});
  std::reverse(out.segments.begin(), out.segments.end());
  out.validate(lat.n, lat.b);
  return out;
}

// Exhaustive enumeration for oracle checks. Guarded: only tiny inputs.
inline std::vector<Segmentation> enumerate_segmentations(int n, int num_labels, int b) {
  if (n < 1 || n > 8)
    throw error(detail::cat("enumerate_segmentations: n must be in 1..8, got ", n));
  if (num_labels < 1 || b < 1) throw error("enumerate_segmentations: bad dims");
  std::vector<Segmentation> out;
  Segmentation cur;
  auto rec = [&](auto&& self, int pos) -> void {
    if (pos == n) {
      out.push_back(cur);
      return;
    }
    for (int len = 1; len <= b && pos + len <= n; ++len) {
      for (int y = 0; y < num_labels; ++y) {
        cur.segments.push_back(Segment{pos, pos + len - 1, y});
        self(self, pos + len);
        cur.segments.pop_back();
      }
    }
  };
  rec(rec, 0);
  return out;
}

}  // namespace framespan
