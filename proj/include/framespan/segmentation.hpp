#pragma once

#include <algorithm>
#include <vector>

#include "framespan/error.hpp"

namespace framespan {

// Label 0 is always the null role; labels 1..R are the frame's roles in
// ontology order.
constexpr int kNullLabel = 0;

struct Segment {
  int i = 0;  // start token, inclusive
  int j = 0;  // end token, inclusive
  int y = kNullLabel;

  int length() const { return j - i + 1; }
  bool operator==(const Segment&) const = default;
  auto operator<=>(const Segment&) const = default;
};

// A labeled segmentation tiling the whole sentence.
struct Segmentation {
  std::vector<Segment> segments;

  bool operator==(const Segmentation&) const = default;

  // Tiling invariants: starts at 0, ends at n-1, adjacent, lengths <= b.
  void validate(int n, int b) const {
    if (segments.empty()) throw error("Segmentation: empty");
    if (segments.front().i != 0)
      throw error(detail::cat("Segmentation: first segment starts at ", segments.front().i));
    if (segments.back().j != n - 1)
      throw error(detail::cat("Segmentation: last segment ends at ", segments.back().j,
                              ", sentence length ", n));
    for (size_t k = 0; k < segments.size(); ++k) {
      const Segment& s = segments[k];
      if (s.i > s.j || s.i < 0 || s.j >= n)
        throw error(detail::cat("Segmentation: bad span [", s.i, ",", s.j, "] for n=", n));
      if (s.length() > b)
        throw error(detail::cat("Segmentation: segment length ", s.length(), " exceeds cap ", b));
      if (s.y < 0) throw error(detail::cat("Segmentation: negative label ", s.y));
      if (k + 1 < segments.size() && segments[k + 1].i != s.j + 1)
        throw error(detail::cat("Segmentation: gap or overlap after position ", s.j));
    }
  }

  std::vector<Segment> nonnull() const {
    std::vector<Segment> out;
    for (const Segment& s : segments)
      if (s.y != kNullLabel) out.push_back(s);
    return out;
  }
};

// Fills the gaps around the given non-null segments with null segments,
// chunking each gap left to right into runs of length b (the canonical
// tiling used by the non-marginalized numerator mode).
inline Segmentation canonical_tiling(std::vector<Segment> nonnull, int n, int b) {
  std::sort(nonnull.begin(), nonnull.end());
  Segmentation out;
  auto fill_gap = [&](int lo, int hi) {
    int at = lo;
    while (at <= hi) {
      int end = std::min(at + b - 1, hi);
      out.segments.push_back({at, end, kNullLabel});
      at = end + 1;
    }
  };
  int next = 0;
  for (const Segment& s : nonnull) {
    if (s.i < next) throw error(detail::cat("canonical_tiling: overlapping span at ", s.i));
    fill_gap(next, s.i - 1);
    out.segments.push_back(s);
    next = s.j + 1;
  }
  fill_gap(next, n - 1);
  out.validate(n, b);
  return out;
}

}  // namespace framespan
