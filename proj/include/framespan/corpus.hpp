#pragma once

#include <cstdint>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "json.hpp"

#include "framespan/error.hpp"
#include "framespan/rng.hpp"
#include "framespan/segmentation.hpp"
#include "framespan/tensor.hpp"

namespace framespan {

using ordered_json = nlohmann::ordered_json;

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// ---- annotated sentences ----

struct FrameElement {
  std::string role;
  int start = 0;
  int end = 0;
  bool operator==(const FrameElement&) const = default;
};

struct Annotation {
  int target_start = 0;
  int target_end = 0;
  std::string lu;
  std::string frame;
  std::vector<FrameElement> elements;
  bool operator==(const Annotation&) const = default;
};

struct AnnotatedSentence {
  std::vector<std::string> tokens;
  std::vector<std::string> pos;
  std::vector<Annotation> annotations;
  bool operator==(const AnnotatedSentence&) const = default;
};

namespace detail {

inline void warn(std::vector<std::string>* sink, std::string msg) {
  if (sink) sink->push_back(std::move(msg));
}

inline int json_span_index(const ordered_json& v, const char* field, int line_no) {
  if (!v.is_number_integer())
    throw data_error(detail::cat("line ", line_no, ": ", field, " index is not an integer"));
  return v.get<int>();
}

}  // namespace detail

// One JSON object per line: {tokens, pos, annotations: [{target: [s,e], lu,
// frame, elements: [{role, span: [s,e]}]}]}. Indices are 0-based inclusive.
// Duplicate annotations of one target keep the first; a role annotated with
// two spans (a discontinuous argument) is dropped. Both emit warnings.
// Structural violations throw data_error naming the line and field.
inline std::vector<AnnotatedSentence> load_corpus_stream(std::istream& in,
                                                         std::vector<std::string>* warnings = nullptr) {
  std::vector<AnnotatedSentence> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ordered_json j;
    try {
      j = ordered_json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw data_error(detail::cat("line ", line_no, ": malformed JSON: ", e.what()));
    }
    AnnotatedSentence s;
    try {
      s.tokens = j.at("tokens").get<std::vector<std::string>>();
      s.pos = j.at("pos").get<std::vector<std::string>>();
      if (j.contains("annotations")) {
        for (const auto& a : j.at("annotations")) {
          Annotation ann;
          ann.target_start = detail::json_span_index(a.at("target").at(0), "target", line_no);
          ann.target_end = detail::json_span_index(a.at("target").at(1), "target", line_no);
          ann.lu = a.at("lu").get<std::string>();
          ann.frame = a.at("frame").get<std::string>();
          if (a.contains("elements")) {
            for (const auto& e : a.at("elements")) {
              FrameElement fe;
              fe.role = e.at("role").get<std::string>();
              fe.start = detail::json_span_index(e.at("span").at(0), "span", line_no);
              fe.end = detail::json_span_index(e.at("span").at(1), "span", line_no);
              ann.elements.push_back(std::move(fe));
            }
          }
          s.annotations.push_back(std::move(ann));
        }
      }
    } catch (const nlohmann::json::exception& e) {
      throw data_error(detail::cat("line ", line_no, ": schema violation: ", e.what()));
    }

    const int n = static_cast<int>(s.tokens.size());
    if (n == 0) throw data_error(detail::cat("line ", line_no, ": tokens is empty"));
    if (s.pos.size() != s.tokens.size())
      throw data_error(detail::cat("line ", line_no, ": pos length ", s.pos.size(),
                                   " does not match tokens length ", s.tokens.size()));

    // duplicate targets: first one wins
    std::vector<Annotation> kept;
    std::unordered_set<std::uint64_t> seen_targets;
    for (auto& ann : s.annotations) {
      const std::uint64_t key =
          (static_cast<std::uint64_t>(ann.target_start) << 32) | static_cast<std::uint32_t>(ann.target_end);
      if (!seen_targets.insert(key).second) {
        detail::warn(warnings, detail::cat("line ", line_no, ": duplicate annotation for target [",
                                           ann.target_start, ",", ann.target_end, "] dropped"));
        continue;
      }
      kept.push_back(std::move(ann));
    }
    s.annotations = std::move(kept);

    for (auto& ann : s.annotations) {
      if (ann.target_start < 0 || ann.target_start > ann.target_end || ann.target_end >= n)
        throw data_error(detail::cat("line ", line_no, ": target [", ann.target_start, ",",
                                     ann.target_end, "] out of bounds for ", n, " tokens"));
      // discontinuous arguments: a role with more than one span is dropped
      std::unordered_map<std::string, int> role_count;
      for (const auto& e : ann.elements) ++role_count[e.role];
      std::vector<FrameElement> elems;
      std::unordered_set<std::string> warned;
      for (auto& e : ann.elements) {
        if (role_count[e.role] > 1) {
          if (warned.insert(e.role).second)
            detail::warn(warnings, detail::cat("line ", line_no, ": discontinuous argument for role ",
                                               e.role, " dropped"));
          continue;
        }
        elems.push_back(std::move(e));
      }
      ann.elements = std::move(elems);

      for (const auto& e : ann.elements)
        if (e.start < 0 || e.start > e.end || e.end >= n)
          throw data_error(detail::cat("line ", line_no, ": span [", e.start, ",", e.end,
                                       "] of role ", e.role, " out of bounds for ", n, " tokens"));
      // no two elements of one frame may overlap
      std::vector<const FrameElement*> sorted;
      for (const auto& e : ann.elements) sorted.push_back(&e);
      std::sort(sorted.begin(), sorted.end(),
                [](const FrameElement* a, const FrameElement* b) { return a->start < b->start; });
      for (size_t k = 0; k + 1 < sorted.size(); ++k)
        if (sorted[k + 1]->start <= sorted[k]->end)
          throw data_error(detail::cat("line ", line_no, ": elements ", sorted[k]->role, " and ",
                                       sorted[k + 1]->role, " overlap"));
    }
    out.push_back(std::move(s));
  }
  return out;
}

inline std::vector<AnnotatedSentence> load_corpus(const std::string& path,
                                                  std::vector<std::string>* warnings = nullptr) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open corpus file: " + path);
  return load_corpus_stream(in, warnings);
}

inline std::string serialize_corpus(const std::vector<AnnotatedSentence>& sentences) {
  std::ostringstream os;
  for (const AnnotatedSentence& s : sentences) {
    ordered_json j;
    j["tokens"] = s.tokens;
    j["pos"] = s.pos;
    j["annotations"] = ordered_json::array();
    for (const Annotation& a : s.annotations) {
      ordered_json ja;
      ja["target"] = {a.target_start, a.target_end};
      ja["lu"] = a.lu;
      ja["frame"] = a.frame;
      ja["elements"] = ordered_json::array();
      for (const FrameElement& e : a.elements) {
        ordered_json je;
        je["role"] = e.role;
        je["span"] = {e.start, e.end};
        ja["elements"].push_back(je);
      }
      j["annotations"].push_back(ja);
    }
    os << j.dump() << "\n";
  }
  return os.str();
}

// ---- frame ontology ----

// Frames, their role lists, and the lexicon (lexical unit -> candidate
// frames), all order-preserving: label ids, role rows, and candidate order
// are defined by file order. Role embeddings are shared across frames by
// role name; row 0 is the null role.
struct FrameOntology {
  std::vector<std::string> frame_names;
  std::vector<std::vector<std::string>> frame_roles;
  std::vector<std::string> lu_names;
  std::vector<std::vector<int>> lu_frames;

  std::vector<std::string> role_names;  // global role rows; index 0 is null
  std::vector<std::vector<int>> frame_role_rows;

  std::unordered_map<std::string, int> frame_index;
  std::unordered_map<std::string, int> lu_index;

  int frame_id(const std::string& name) const {
    auto it = frame_index.find(name);
    return it == frame_index.end() ? -1 : it->second;
  }
  int lu_id(const std::string& name) const {
    auto it = lu_index.find(name);
    return it == lu_index.end() ? -1 : it->second;
  }

  // labels for frame f: 0 = null, k = (k-1)th role in the frame's list
  int num_labels(int frame) const { return static_cast<int>(frame_roles[frame].size()) + 1; }

  // global role-table row backing label y of the given frame
  int role_row(int frame, int y) const {
    if (y == kNullLabel) return 0;
    if (frame < 0 || frame >= static_cast<int>(frame_role_rows.size()))
      throw data_error(detail::cat("role_row: unknown frame id ", frame));
    const auto& rows = frame_role_rows[frame];
    if (y < 1 || y > static_cast<int>(rows.size()))
      throw data_error(detail::cat("role_row: label ", y, " not valid for frame ",
                                   frame_names[frame], " with ", rows.size(), " roles"));
    return rows[y - 1];
  }

  int label_of_role(int frame, const std::string& role) const {
    const auto& roles = frame_roles[frame];
    for (size_t k = 0; k < roles.size(); ++k)
      if (roles[k] == role) return static_cast<int>(k) + 1;
    return -1;
  }

  std::string canonical() const {
    ordered_json j;
    j["frames"] = ordered_json::object();
    for (size_t f = 0; f < frame_names.size(); ++f) j["frames"][frame_names[f]] = frame_roles[f];
    j["lexicon"] = ordered_json::object();
    for (size_t l = 0; l < lu_names.size(); ++l) {
      std::vector<std::string> fr;
      for (int f : lu_frames[l]) fr.push_back(frame_names[f]);
      j["lexicon"][lu_names[l]] = fr;
    }
    return j.dump();
  }

  std::uint64_t hash() const { return fnv1a64(canonical()); }
};

inline FrameOntology ontology_from_json(const ordered_json& j) {
  FrameOntology o;
  o.role_names.push_back("<null>");
  std::unordered_map<std::string, int> role_ix;
  if (!j.contains("frames") || !j.at("frames").is_object())
    throw data_error("ontology: missing frames object");
  for (const auto& [name, roles] : j.at("frames").items()) {
    if (o.frame_index.count(name)) throw data_error("ontology: duplicate frame " + name);
    o.frame_index[name] = static_cast<int>(o.frame_names.size());
    o.frame_names.push_back(name);
    std::vector<std::string> rl;
    std::vector<int> rows;
    std::unordered_set<std::string> seen;
    for (const auto& r : roles) {
      std::string rs = r.get<std::string>();
      if (!seen.insert(rs).second)
        throw data_error(detail::cat("ontology: duplicate role ", rs, " in frame ", name));
      auto it = role_ix.find(rs);
      int row;
      if (it == role_ix.end()) {
        row = static_cast<int>(o.role_names.size());
        role_ix[rs] = row;
        o.role_names.push_back(rs);
      } else {
        row = it->second;
      }
      rl.push_back(std::move(rs));
      rows.push_back(row);
    }
    o.frame_roles.push_back(std::move(rl));
    o.frame_role_rows.push_back(std::move(rows));
  }
  if (j.contains("lexicon")) {
    for (const auto& [lu, frames] : j.at("lexicon").items()) {
      if (o.lu_index.count(lu)) throw data_error("ontology: duplicate lexical unit " + lu);
      o.lu_index[lu] = static_cast<int>(o.lu_names.size());
      o.lu_names.push_back(lu);
      std::vector<int> ids;
      for (const auto& f : frames) {
        int id = o.frame_id(f.get<std::string>());
        if (id < 0)
          throw data_error(detail::cat("ontology: lexical unit ", lu, " lists unknown frame ",
                                       f.get<std::string>()));
        ids.push_back(id);
      }
      if (ids.empty()) throw data_error("ontology: lexical unit " + lu + " has no frames");
      o.lu_frames.push_back(std::move(ids));
    }
  }
  return o;
}

inline FrameOntology load_ontology(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open ontology file: " + path);
  ordered_json j;
  try {
    j = ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw data_error(detail::cat("ontology ", path, ": malformed JSON: ", e.what()));
  }
  return ontology_from_json(j);
}

// ---- vocabulary ----

struct Vocabulary {
  static constexpr int kUnkWord = 0;
  static constexpr int kUnkPos = 0;

  std::vector<std::string> words;  // index 0 is <unk>
  std::vector<long> freq;
  std::vector<std::string> pos_tags;  // index 0 is <unk-pos>
  std::unordered_map<std::string, int> word_ix;
  std::unordered_map<std::string, int> pos_ix;

  Vocabulary() {
    words.push_back("<unk>");
    freq.push_back(0);
    word_ix["<unk>"] = 0;
    pos_tags.push_back("<unk-pos>");
    pos_ix["<unk-pos>"] = 0;
  }

  int word_id(const std::string& w) const {
    auto it = word_ix.find(w);
    return it == word_ix.end() ? kUnkWord : it->second;
  }
  int pos_id(const std::string& p) const {
    auto it = pos_ix.find(p);
    return it == pos_ix.end() ? kUnkPos : it->second;
  }

  void add_word(const std::string& w) {
    auto it = word_ix.find(w);
    if (it == word_ix.end()) {
      word_ix[w] = static_cast<int>(words.size());
      words.push_back(w);
      freq.push_back(1);
    } else {
      ++freq[it->second];
    }
  }
  void add_pos(const std::string& p) {
    if (!pos_ix.count(p)) {
      pos_ix[p] = static_cast<int>(pos_tags.size());
      pos_tags.push_back(p);
    }
  }

  std::string canonical() const {
    std::ostringstream os;
    for (size_t k = 0; k < words.size(); ++k) os << words[k] << '\x1f' << freq[k] << '\x1e';
    os << '\x1d';
    for (const auto& p : pos_tags) os << p << '\x1e';
    return os.str();
  }
  std::uint64_t hash() const { return fnv1a64(canonical()); }
};

inline ordered_json vocabulary_to_json(const Vocabulary& v) {
  ordered_json j;
  j["words"] = std::vector<std::string>(v.words.begin() + 1, v.words.end());
  j["freq"] = std::vector<long>(v.freq.begin() + 1, v.freq.end());
  j["pos_tags"] = std::vector<std::string>(v.pos_tags.begin() + 1, v.pos_tags.end());
  return j;
}

inline Vocabulary vocabulary_from_json(const ordered_json& j) {
  Vocabulary v;
  const auto& words = j.at("words");
  const auto& freq = j.at("freq");
  if (words.size() != freq.size()) throw data_error("vocabulary: words and freq disagree");
  for (size_t k = 0; k < words.size(); ++k) {
    const std::string w = words[k].get<std::string>();
    if (v.word_ix.count(w)) throw data_error("vocabulary: duplicate word " + w);
    v.word_ix[w] = static_cast<int>(v.words.size());
    v.words.push_back(w);
    v.freq.push_back(freq[k].get<long>());
  }
  for (const auto& p : j.at("pos_tags")) v.add_pos(p.get<std::string>());
  return v;
}

// During training each occurrence of a frequency-1 word flips to UNK with
// probability p; everything else keeps its id. Out-of-vocabulary words are
// always UNK.
inline int train_word_id(const Vocabulary& v, const std::string& w, double p, Rng& rng) {
  int id = v.word_id(w);
  if (id != Vocabulary::kUnkWord && v.freq[id] == 1 && rng.bernoulli(p)) return Vocabulary::kUnkWord;
  return id;
}

inline std::vector<int> apply_unk_policy(const Vocabulary& v, const std::vector<std::string>& toks,
                                         double p, Rng& rng) {
  std::vector<int> ids;
  ids.reserve(toks.size());
  for (const auto& w : toks) ids.push_back(train_word_id(v, w, p, rng));
  return ids;
}

// ---- pretrained embeddings ----

// Fixed table; never updated by training. Row 0 is the all-zero vector that
// absent words map to.
struct PretrainedTable {
  int dim = 0;
  std::vector<std::string> words;  // file order, aligned with rows 1..
  std::unordered_map<std::string, int> index;
  Tensor table{std::vector<int>{1, 1}};

  int row_of(const std::string& w) const {
    auto it = index.find(w);
    return it == index.end() ? 0 : it->second;
  }

  std::uint64_t hash() const {
    std::ostringstream os;
    os << dim << '\x1d';
    for (const auto& w : words) os << w << '\x1e';
    for (double x : table.v) os << x << '\x1f';
    return fnv1a64(os.str());
  }
};

inline PretrainedTable load_pretrained_stream(std::istream& in,
                                              std::vector<std::string>* warnings = nullptr) {
  PretrainedTable t;
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    std::vector<double> vals;
    double x;
    while (ls >> x) vals.push_back(x);
    if (!ls.eof())
      throw data_error(detail::cat("embeddings line ", line_no, ": non-numeric value"));
    if (vals.empty()) throw data_error(detail::cat("embeddings line ", line_no, ": no values"));
    if (t.dim == 0) t.dim = static_cast<int>(vals.size());
    if (static_cast<int>(vals.size()) != t.dim)
      throw data_error(detail::cat("embeddings line ", line_no, ": dimension ", vals.size(),
                                   " does not match ", t.dim));
    if (t.index.count(word)) {
      detail::warn(warnings, detail::cat("embeddings line ", line_no, ": duplicate word ", word,
                                         " ignored"));
      continue;
    }
    t.index[word] = static_cast<int>(rows.size()) + 1;
    t.words.push_back(word);
    rows.push_back(std::move(vals));
  }
  if (t.dim == 0) t.dim = 1;  // empty file: a single zero row, dim 1
  t.table = Tensor({static_cast<int>(rows.size()) + 1, t.dim});
  for (size_t r = 0; r < rows.size(); ++r)
    for (int c = 0; c < t.dim; ++c) t.table.at(static_cast<int>(r) + 1, c) = rows[r][c];
  return t;
}

inline PretrainedTable load_pretrained(const std::string& path,
                                       std::vector<std::string>* warnings = nullptr) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open embeddings file: " + path);
  return load_pretrained_stream(in, warnings);
}

// ---- scaffold instances and bracketed trees ----

struct ScaffoldInstance {
  enum class Source { treebank, framenet };
  std::vector<std::string> tokens;
  std::vector<std::string> pos;
  std::vector<std::pair<int, int>> positive_spans;  // sorted, deduped, length <= D
  Source source = Source::treebank;
};

namespace detail {

struct TreeNode {
  std::string label;
  std::string token;  // nonempty iff leaf
  std::vector<TreeNode> children;
  int start = 0, end = 0;
};

inline void skip_ws(const std::string& s, size_t& at) {
  while (at < s.size() && (s[at] == ' ' || s[at] == '\t')) ++at;
}

inline TreeNode parse_tree_node(const std::string& s, size_t& at) {
  skip_ws(s, at);
  if (at >= s.size()) throw data_error(detail::cat("tree: unexpected end at offset ", at));
  TreeNode node;
  if (s[at] == '(') {
    ++at;
    skip_ws(s, at);
    size_t start = at;
    while (at < s.size() && s[at] != ' ' && s[at] != '(' && s[at] != ')') ++at;
    node.label = s.substr(start, at - start);
    if (node.label.empty())
      throw data_error(detail::cat("tree: missing node label at offset ", start));
    skip_ws(s, at);
    while (at < s.size() && s[at] != ')') {
      node.children.push_back(parse_tree_node(s, at));
      skip_ws(s, at);
    }
    if (at >= s.size()) throw data_error(detail::cat("tree: unbalanced '(' at offset ", at));
    ++at;  // consume ')'
    if (node.children.empty())
      throw data_error(detail::cat("tree: node ", node.label, " has no children at offset ", at));
    return node;
  }
  size_t start = at;
  while (at < s.size() && s[at] != ' ' && s[at] != '(' && s[at] != ')') ++at;
  node.token = s.substr(start, at - start);
  return node;
}

inline void collect_tree(const TreeNode& node, const std::string& parent_label,
                         std::vector<std::string>& tokens, std::vector<std::string>& pos,
                         std::vector<std::pair<int, int>>& spans, int& cursor, int& lo, int& hi) {
  if (!node.token.empty()) {
    tokens.push_back(node.token);
    pos.push_back(parent_label);
    lo = hi = cursor;
    ++cursor;
    return;
  }
  int first = -1, last = -1;
  for (const TreeNode& c : node.children) {
    int clo = 0, chi = 0;
    collect_tree(c, node.label, tokens, pos, spans, cursor, clo, chi);
    if (first < 0) first = clo;
    last = chi;
  }
  lo = first;
  hi = last;
  spans.emplace_back(lo, hi);
}

}  // namespace detail

// "(S (NP a b) (VP c))" -> tokens a b c, POS from the immediate parent
// label, positive spans = every nonterminal's token span (unary chains count
// once), filtered to length <= max_len.
inline ScaffoldInstance parse_bracketed_tree(const std::string& line, int max_len) {
  size_t at = 0;
  detail::TreeNode root = detail::parse_tree_node(line, at);
  detail::skip_ws(line, at);
  if (at != line.size() && line.find_first_not_of(" \t\r", at) != std::string::npos)
    throw data_error(detail::cat("tree: trailing text at offset ", at));
  if (!root.token.empty()) throw data_error("tree: top level must be a bracketed node");

  ScaffoldInstance inst;
  inst.source = ScaffoldInstance::Source::treebank;
  std::vector<std::pair<int, int>> spans;
  int cursor = 0, lo = 0, hi = 0;
  detail::collect_tree(root, root.label, inst.tokens, inst.pos, spans, cursor, lo, hi);
  std::sort(spans.begin(), spans.end());
  spans.erase(std::unique(spans.begin(), spans.end()), spans.end());
  for (auto [i, j] : spans)
    if (j - i + 1 <= max_len) inst.positive_spans.emplace_back(i, j);
  return inst;
}

inline std::vector<ScaffoldInstance> load_trees(const std::string& path, int max_len) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open tree file: " + path);
  std::vector<ScaffoldInstance> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse_bracketed_tree(line, max_len));
    } catch (const data_error& e) {
      throw data_error(detail::cat("trees line ", line_no, ": ", e.what()));
    }
  }
  return out;
}

// FrameNet side of the scaffold: every span annotated as a frame element of
// any frame in the sentence is a positive.
inline ScaffoldInstance scaffold_from_sentence(const AnnotatedSentence& s, int max_len) {
  ScaffoldInstance inst;
  inst.source = ScaffoldInstance::Source::framenet;
  inst.tokens = s.tokens;
  inst.pos = s.pos;
  std::vector<std::pair<int, int>> spans;
  for (const Annotation& a : s.annotations)
    for (const FrameElement& e : a.elements)
      if (e.end - e.start + 1 <= max_len) spans.emplace_back(e.start, e.end);
  std::sort(spans.begin(), spans.end());
  spans.erase(std::unique(spans.begin(), spans.end()), spans.end());
  inst.positive_spans = std::move(spans);
  return inst;
}

// Word frequencies count every occurrence in the training inputs (argument
// corpus plus scaffold corpus); POS tags come along for the ride.
inline Vocabulary build_vocabulary(const std::vector<AnnotatedSentence>& sentences,
                                   const std::vector<ScaffoldInstance>& scaffold = {}) {
  Vocabulary v;
  for (const auto& s : sentences) {
    for (const auto& w : s.tokens) v.add_word(w);
    for (const auto& p : s.pos) v.add_pos(p);
  }
  for (const auto& s : scaffold) {
    for (const auto& w : s.tokens) v.add_word(w);
    for (const auto& p : s.pos) v.add_pos(p);
  }
  return v;
}

// ---- argument-id instances ----

struct ArgInstance {
  std::string id;  // "s<sentence>:a<annotation>"
  std::vector<std::string> tokens;
  std::vector<std::string> pos;
  int target_start = 0;
  int target_end = 0;
  int lu_id = -1;  // -1: not in ontology (allowed at prediction only)
  int frame_id = -1;
  std::vector<Segment> gold;  // non-null segments, sorted, per-frame label ids
  int sentence_index = -1;

  int n() const { return static_cast<int>(tokens.size()); }
};

// One instance per (sentence, annotation). Gold elements map to per-frame
// label ids; instances with a gold span longer than b are excluded with a
// warning. Unknown frames and roles are hard errors; unknown lexical units
// leave lu_id = -1 for the caller to reject (training) or map to the UNK
// row (prediction).
inline std::vector<ArgInstance> build_instances(const std::vector<AnnotatedSentence>& sentences,
                                                const FrameOntology& onto, int b,
                                                std::vector<std::string>* warnings = nullptr) {
  std::vector<ArgInstance> out;
  for (size_t si = 0; si < sentences.size(); ++si) {
    const AnnotatedSentence& s = sentences[si];
    for (size_t ai = 0; ai < s.annotations.size(); ++ai) {
      const Annotation& a = s.annotations[ai];
      ArgInstance inst;
      inst.id = detail::cat("s", si, ":a", ai);
      inst.sentence_index = static_cast<int>(si);
      inst.tokens = s.tokens;
      inst.pos = s.pos;
      inst.target_start = a.target_start;
      inst.target_end = a.target_end;
      inst.frame_id = onto.frame_id(a.frame);
      if (inst.frame_id < 0)
        throw data_error(detail::cat("instance ", inst.id, ": unknown frame ", a.frame));
      inst.lu_id = onto.lu_id(a.lu);

      bool too_long = false;
      for (const FrameElement& e : a.elements) {
        int y = onto.label_of_role(inst.frame_id, e.role);
        if (y < 0)
          throw data_error(detail::cat("instance ", inst.id, ": role ", e.role,
                                       " not in frame ", a.frame));
        if (e.end - e.start + 1 > b) {
          too_long = true;
          break;
        }
        inst.gold.push_back({e.start, e.end, y});
      }
      if (too_long) {
        detail::warn(warnings, detail::cat("instance ", inst.id, ": gold span longer than ", b,
                                           " tokens, instance excluded"));
        continue;
      }
      std::sort(inst.gold.begin(), inst.gold.end());
      out.push_back(std::move(inst));
    }
  }
  return out;
}

}  // namespace framespan
