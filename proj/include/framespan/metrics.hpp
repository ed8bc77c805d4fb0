#pragma once

// Exact-match evaluation. Arguments count as correct only when span
// boundaries and role agree (and, in end-to-end mode, the frame too).
// Micro-averaged over all instances; null segments never enter the counts.

#include <iomanip>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "framespan/error.hpp"
#include "framespan/segmentation.hpp"
#include "json.hpp"

namespace framespan {

struct EvalReport {
  long tp = 0;
  long fp = 0;
  long fn = 0;

  // zero denominators score 0 by convention
  double precision() const { return tp + fp == 0 ? 0.0 : static_cast<double>(tp) / (tp + fp); }
  double recall() const { return tp + fn == 0 ? 0.0 : static_cast<double>(tp) / (tp + fn); }
  double f1() const {
    long denom = 2 * tp + fp + fn;
    return denom == 0 ? 0.0 : static_cast<double>(2 * tp) / denom;
  }
};

struct FrameReport {
  long correct = 0;
  long total = 0;
  double accuracy() const { return total == 0 ? 0.0 : static_cast<double>(correct) / total; }
};

namespace detail {

inline std::set<std::tuple<int, int, int>> nonnull_set(const std::vector<Segment>& segs) {
  std::set<std::tuple<int, int, int>> out;
  for (const Segment& s : segs)
    if (s.y != kNullLabel) out.insert({s.i, s.j, s.y});
  return out;
}

}  // namespace detail

// Gold-frames mode: predicted and gold role labels live in the same frame,
// so exact (i, j, y) matching is meaningful.
inline EvalReport score_arguments(const std::vector<std::vector<Segment>>& pred,
                                  const std::vector<std::vector<Segment>>& gold) {
  if (pred.size() != gold.size())
    throw error(detail::cat("score_arguments: ", pred.size(), " predictions vs ", gold.size(),
                            " gold instances"));
  EvalReport r;
  for (size_t k = 0; k < pred.size(); ++k) {
    auto p = detail::nonnull_set(pred[k]);
    auto g = detail::nonnull_set(gold[k]);
    for (const auto& t : p)
      g.count(t) ? ++r.tp : ++r.fp;
    for (const auto& t : g)
      if (!p.count(t)) ++r.fn;
  }
  return r;
}

// End-to-end mode: a wrong frame forfeits the whole instance, every predicted
// argument a false positive and every gold argument a false negative.
inline EvalReport score_arguments(const std::vector<std::vector<Segment>>& pred,
                                  const std::vector<int>& pred_frames,
                                  const std::vector<std::vector<Segment>>& gold,
                                  const std::vector<int>& gold_frames) {
  if (pred.size() != gold.size() || pred.size() != pred_frames.size() ||
      gold.size() != gold_frames.size())
    throw error("score_arguments: instance counts disagree");
  EvalReport r;
  for (size_t k = 0; k < pred.size(); ++k) {
    auto p = detail::nonnull_set(pred[k]);
    auto g = detail::nonnull_set(gold[k]);
    if (pred_frames[k] != gold_frames[k]) {
      r.fp += static_cast<long>(p.size());
      r.fn += static_cast<long>(g.size());
      continue;
    }
    for (const auto& t : p)
      g.count(t) ? ++r.tp : ++r.fp;
    for (const auto& t : g)
      if (!p.count(t)) ++r.fn;
  }
  return r;
}

inline FrameReport score_frames(const std::vector<int>& pred, const std::vector<int>& gold) {
  if (pred.size() != gold.size())
    throw error(detail::cat("score_frames: ", pred.size(), " predictions vs ", gold.size(),
                            " gold instances"));
  FrameReport r;
  r.total = static_cast<long>(pred.size());
  for (size_t k = 0; k < pred.size(); ++k)
    if (pred[k] == gold[k]) ++r.correct;
  return r;
}

inline nlohmann::ordered_json report_to_json(const EvalReport& r) {
  return nlohmann::ordered_json{{"tp", r.tp},
                                {"fp", r.fp},
                                {"fn", r.fn},
                                {"precision", r.precision()},
                                {"recall", r.recall()},
                                {"f1", r.f1()}};
}

inline nlohmann::ordered_json report_to_json(const FrameReport& r) {
  return nlohmann::ordered_json{
      {"correct", r.correct}, {"total", r.total}, {"accuracy", r.accuracy()}};
}

// Human-oriented companion to the JSON output.
inline std::string format_reports(const FrameReport* frames, const EvalReport* args) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4);
  if (frames) {
    os << "frame id    " << std::setw(6) << frames->correct << " / " << std::setw(6)
       << frames->total << "  acc " << frames->accuracy() << "\n";
  }
  if (args) {
    os << "arguments   tp " << std::setw(6) << args->tp << "  fp " << std::setw(6) << args->fp
       << "  fn " << std::setw(6) << args->fn << "\n";
    os << "            P " << args->precision() << "  R " << args->recall() << "  F1 "
       << args->f1() << "\n";
  }
  return os.str();
}

}  // namespace framespan
