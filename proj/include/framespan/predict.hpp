#pragma once

// Prediction over one or more checkpoints. Argument ensembling adds the
// members' lattices and decodes once; frame ensembling adds the members'
// scores and takes one argmax. Members must agree on the ontology (and on
// the span cap, or the summed lattices would not line up).

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "framespan/checkpoint.hpp"
#include "framespan/frameid.hpp"
#include "framespan/metrics.hpp"
#include "framespan/model.hpp"
#include "framespan/train.hpp"
#include "json.hpp"

namespace framespan {

struct LoadedArgModel {
  Checkpoint ck;
  ParameterStore store;
  std::optional<ArgModel> model;

  static std::unique_ptr<LoadedArgModel> open(const std::string& path) {
    auto out = std::make_unique<LoadedArgModel>();
    out->ck = load_checkpoint(path);
    if (out->ck.kind != "argument")
      throw data_error(detail::cat(path, ": checkpoint kind is \"", out->ck.kind,
                                   "\", expected \"argument\""));
    Rng rng(0);  // values are overwritten right away
    out->model.emplace(ArgModel::create(out->store, out->ck.config, out->ck.vocab,
                                        out->ck.ontology, out->ck.pretrained.dim, rng));
    restore_parameters(out->store, out->ck);
    return out;
  }
};

struct LoadedFrameModel {
  Checkpoint ck;
  ParameterStore store;
  std::optional<FrameIdParams> model;

  static std::unique_ptr<LoadedFrameModel> open(const std::string& path) {
    auto out = std::make_unique<LoadedFrameModel>();
    out->ck = load_checkpoint(path);
    if (out->ck.kind != "frame")
      throw data_error(detail::cat(path, ": checkpoint kind is \"", out->ck.kind,
                                   "\", expected \"frame\""));
    Rng rng(0);
    out->model.emplace(FrameIdParams::create(
        out->store, out->ck.config, static_cast<int>(out->ck.vocab.words.size()),
        static_cast<int>(out->ck.vocab.pos_tags.size()),
        static_cast<int>(out->ck.ontology.frame_names.size()),
        static_cast<int>(out->ck.ontology.lu_names.size()), out->ck.pretrained.dim, rng));
    restore_parameters(out->store, out->ck);
    return out;
  }
};

namespace detail {

template <class Member>
void check_members_agree(const std::vector<std::unique_ptr<Member>>& members) {
  if (members.empty()) throw error("ensemble: no members");
  const Checkpoint& first = members[0]->ck;
  for (size_t k = 1; k < members.size(); ++k) {
    const Checkpoint& ck = members[k]->ck;
    if (ck.ontology.hash() != first.ontology.hash())
      throw data_error("ensemble members disagree on the ontology");
    if (ck.vocab.hash() != first.vocab.hash())
      throw data_error("ensemble members disagree on the vocabulary");
    if (ck.config.max_span_length != first.config.max_span_length)
      throw data_error("ensemble members disagree on max_span_length");
  }
}

}  // namespace detail

// One lattice per member, summed, one Viterbi pass.
inline std::vector<Segmentation> predict_arguments(
    const std::vector<std::unique_ptr<LoadedArgModel>>& members,
    const std::vector<ArgInstance>& instances) {
  detail::check_members_agree(members);
  const FrameOntology& onto = members[0]->ck.ontology;
  std::vector<Segmentation> out;
  out.reserve(instances.size());
  for (const ArgInstance& inst : instances) {
    NumLattice total;
    bool start = true;
    for (const auto& member : members) {
      const Config& cfg = member->ck.config;
      const PretrainedTable* pre =
          member->ck.pretrained.dim > 0 ? &member->ck.pretrained : nullptr;
      Graph g;
      TokenIds ids = make_token_ids(member->ck.vocab, pre, inst.tokens, inst.pos);
      ArgGraphParts parts = build_arg_parts(g, *member->model, cfg, onto, pre, ids,
                                            inst.frame_id, inst.lu_id, inst.target_start,
                                            inst.target_end);
      NumLattice lat = materialize(g, parts.lattice);
      if (start) {
        total = std::move(lat);
        start = false;
      } else {
        total += lat;
      }
    }
    out.push_back(viterbi(total));
  }
  return out;
}

// Scores summed across members, argmax once; ties go to the frame listed
// first among the unit's candidates.
inline std::vector<int> predict_frames(
    const std::vector<std::unique_ptr<LoadedFrameModel>>& members,
    const std::vector<ArgInstance>& instances) {
  detail::check_members_agree(members);
  const FrameOntology& onto = members[0]->ck.ontology;
  std::vector<int> out;
  out.reserve(instances.size());
  for (const ArgInstance& inst : instances) {
    std::vector<int> cands = frame_candidates(onto, inst.lu_id);
    std::vector<std::vector<double>> member_scores;
    for (const auto& member : members) {
      const PretrainedTable* pre =
          member->ck.pretrained.dim > 0 ? &member->ck.pretrained : nullptr;
      Graph g;
      TokenIds ids = make_token_ids(member->ck.vocab, pre, inst.tokens, inst.pos);
      std::vector<Node> h_tok = frameid_encode_tokens(g, *member->model, ids, pre);
      Node u_t =
          frameid_target_vector(g, *member->model, h_tok, inst.target_start, inst.target_end);
      std::vector<Node> scores = frame_scores(g, *member->model, u_t, inst.lu_id, cands);
      std::vector<double> vals(scores.size());
      for (size_t k = 0; k < scores.size(); ++k) vals[k] = g.scalar_value(scores[k]);
      member_scores.push_back(std::move(vals));
    }
    out.push_back(cands[ensemble_frame_choice(member_scores)]);
  }
  return out;
}

// Frames first, then arguments conditioned on the predicted frame.
inline std::pair<std::vector<int>, std::vector<Segmentation>> predict_end_to_end(
    const std::vector<std::unique_ptr<LoadedFrameModel>>& frame_members,
    const std::vector<std::unique_ptr<LoadedArgModel>>& arg_members,
    const std::vector<ArgInstance>& instances) {
  if (!frame_members.empty() && !arg_members.empty() &&
      frame_members[0]->ck.ontology.hash() != arg_members[0]->ck.ontology.hash())
    throw data_error("frame and argument models disagree on the ontology");
  std::vector<int> frames = predict_frames(frame_members, instances);
  std::vector<ArgInstance> reframed = instances;
  for (size_t k = 0; k < reframed.size(); ++k) {
    reframed[k].frame_id = frames[k];
    reframed[k].gold.clear();
  }
  std::vector<Segmentation> segs = predict_arguments(arg_members, reframed);
  return {frames, segs};
}

// ---- prediction files ----

struct Prediction {
  std::string instance_id;
  std::string frame;
  bool has_segments = false;
  std::vector<std::tuple<int, int, std::string>> segments;  // start, end, role name
};

inline void write_predictions(std::ostream& os, const std::vector<ArgInstance>& instances,
                              const FrameOntology& onto, const std::vector<int>* frames,
                              const std::vector<Segmentation>* segs) {
  for (size_t k = 0; k < instances.size(); ++k) {
    nlohmann::ordered_json j;
    j["instance_id"] = instances[k].id;
    int frame_id = frames ? (*frames)[k] : instances[k].frame_id;
    j["frame"] = onto.frame_names[frame_id];
    if (segs) {
      nlohmann::ordered_json arr = nlohmann::ordered_json::array();
      for (const Segment& s : (*segs)[k].segments) {
        if (s.y == kNullLabel) continue;
        arr.push_back({s.i, s.j, onto.frame_roles[frame_id][s.y - 1]});
      }
      j["segments"] = arr;
    }
    os << j.dump() << "\n";
  }
}

inline std::vector<Prediction> read_predictions(std::istream& is) {
  std::vector<Prediction> out;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::ordered_json j;
    try {
      j = nlohmann::ordered_json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw data_error(detail::cat("predictions line ", line_no, ": ", e.what()));
    }
    Prediction p;
    try {
      p.instance_id = j.at("instance_id").get<std::string>();
      p.frame = j.at("frame").get<std::string>();
      if (j.contains("segments")) {
        p.has_segments = true;
        for (const auto& s : j.at("segments")) {
          if (!s.is_array() || s.size() != 3)
            throw data_error("segment entries must be [start, end, role]");
          p.segments.emplace_back(s[0].get<int>(), s[1].get<int>(), s[2].get<std::string>());
        }
      }
    } catch (const nlohmann::json::exception& e) {
      throw data_error(detail::cat("predictions line ", line_no, ": ", e.what()));
    }
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace framespan
