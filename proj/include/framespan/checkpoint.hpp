#pragma once

// Self-contained model files. A checkpoint embeds the config, vocabulary,
// ontology, and pretrained vectors next to the weights, so prediction needs
// nothing but the file. Layout:
//
//   magic "FSPANCKPT" + '\n'
//   uint32  format version
//   uint64  header length, then that many bytes of JSON
//   uint64  tensor count, then per tensor:
//           uint32 name length, name bytes,
//           uint32 rank, int64 dims, float64 values (little endian)
//
// The header stores hashes of the embedded vocabulary and ontology; a
// mismatch on load means the file was altered and is refused.

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "framespan/config.hpp"
#include "framespan/corpus.hpp"
#include "framespan/error.hpp"
#include "framespan/params.hpp"
#include "framespan/tensor.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint io assumes a little-endian host");

namespace framespan {

constexpr char kCheckpointMagic[] = "FSPANCKPT\n";
constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  std::string kind;  // "argument" or "frame"
  Config config;
  Vocabulary vocab;
  FrameOntology ontology;
  PretrainedTable pretrained;  // dim 0 when the model uses none
  double best_dev_metric = 0.0;
  long adam_steps = 0;
  std::map<std::string, Tensor> tensors;
};

namespace detail {

template <class T>
void write_pod(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T read_pod(std::istream& is) {
  T v;
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw data_error("checkpoint: truncated file");
  return v;
}

inline void write_tensor(std::ostream& os, const std::string& name, const Tensor& t) {
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(name.size()));
  os.write(name.data(), static_cast<std::streamsize>(name.size()));
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(t.shape.size()));
  for (int d : t.shape) write_pod<std::int64_t>(os, d);
  os.write(reinterpret_cast<const char*>(t.v.data()),
           static_cast<std::streamsize>(t.v.size() * sizeof(double)));
}

inline std::pair<std::string, Tensor> read_tensor(std::istream& is) {
  auto name_len = read_pod<std::uint32_t>(is);
  if (name_len > 4096) throw data_error("checkpoint: implausible tensor name length");
  std::string name(name_len, '\0');
  is.read(name.data(), name_len);
  auto rank = read_pod<std::uint32_t>(is);
  if (rank > 8) throw data_error("checkpoint: implausible tensor rank");
  std::vector<int> shape(rank);
  for (auto& d : shape) {
    auto v = read_pod<std::int64_t>(is);
    if (v < 1 || v > (1 << 28)) throw data_error("checkpoint: implausible dimension");
    d = static_cast<int>(v);
  }
  Tensor t(shape);
  is.read(reinterpret_cast<char*>(t.v.data()),
          static_cast<std::streamsize>(t.v.size() * sizeof(double)));
  if (!is) throw data_error("checkpoint: truncated tensor data");
  return {name, t};
}

}  // namespace detail

inline void save_checkpoint(const std::string& path, const Checkpoint& ck) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw data_error("cannot write checkpoint: " + path);

  nlohmann::ordered_json header;
  header["kind"] = ck.kind;
  header["format_version"] = kCheckpointVersion;
  header["config"] = ck.config.to_json();
  header["vocab"] = vocabulary_to_json(ck.vocab);
  header["vocab_hash"] = ck.vocab.hash();
  header["ontology"] = nlohmann::ordered_json::parse(ck.ontology.canonical());
  header["ontology_hash"] = ck.ontology.hash();
  header["pretrained_dim"] = ck.pretrained.dim;
  header["pretrained_words"] = ck.pretrained.words;
  header["best_dev_metric"] = ck.best_dev_metric;
  header["adam_steps"] = ck.adam_steps;
  std::string hjson = header.dump();

  os.write(kCheckpointMagic, sizeof(kCheckpointMagic) - 1);
  detail::write_pod<std::uint32_t>(os, kCheckpointVersion);
  detail::write_pod<std::uint64_t>(os, hjson.size());
  os.write(hjson.data(), static_cast<std::streamsize>(hjson.size()));

  std::uint64_t count = ck.tensors.size() + (ck.pretrained.dim > 0 ? 1 : 0);
  detail::write_pod<std::uint64_t>(os, count);
  if (ck.pretrained.dim > 0) detail::write_tensor(os, "data/pretrained", ck.pretrained.table);
  for (const auto& [name, t] : ck.tensors) detail::write_tensor(os, name, t);
  if (!os) throw data_error("failed writing checkpoint: " + path);
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw data_error("cannot open checkpoint: " + path);

  char magic[sizeof(kCheckpointMagic) - 1];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0)
    throw data_error(path + " is not a checkpoint (bad magic)");
  auto version = detail::read_pod<std::uint32_t>(is);
  if (version != kCheckpointVersion)
    throw data_error(detail::cat("checkpoint ", path, ": unsupported format version ", version));

  auto hlen = detail::read_pod<std::uint64_t>(is);
  if (hlen > (1u << 30)) throw data_error("checkpoint: implausible header length");
  std::string hjson(hlen, '\0');
  is.read(hjson.data(), static_cast<std::streamsize>(hlen));
  if (!is) throw data_error("checkpoint: truncated header");

  nlohmann::ordered_json header;
  try {
    header = nlohmann::ordered_json::parse(hjson);
  } catch (const nlohmann::json::exception& e) {
    throw data_error(detail::cat("checkpoint ", path, ": bad header: ", e.what()));
  }

  Checkpoint ck;
  try {
    ck.kind = header.at("kind").get<std::string>();
    ck.config = Config::from_json(header.at("config"));
    ck.vocab = vocabulary_from_json(header.at("vocab"));
    ck.ontology = ontology_from_json(header.at("ontology"));
    ck.pretrained.dim = header.at("pretrained_dim").get<int>();
    ck.pretrained.words = header.at("pretrained_words").get<std::vector<std::string>>();
    ck.best_dev_metric = header.at("best_dev_metric").get<double>();
    ck.adam_steps = header.at("adam_steps").get<long>();

    if (header.at("vocab_hash").get<std::uint64_t>() != ck.vocab.hash())
      throw data_error(detail::cat("checkpoint ", path, ": vocabulary hash mismatch, refusing"));
    if (header.at("ontology_hash").get<std::uint64_t>() != ck.ontology.hash())
      throw data_error(detail::cat("checkpoint ", path, ": ontology hash mismatch, refusing"));
  } catch (const nlohmann::json::exception& e) {
    throw data_error(detail::cat("checkpoint ", path, ": bad header: ", e.what()));
  }
  if (ck.kind != "argument" && ck.kind != "frame")
    throw data_error(detail::cat("checkpoint ", path, ": unknown kind '", ck.kind, "'"));

  auto count = detail::read_pod<std::uint64_t>(is);
  if (count > 100000) throw data_error("checkpoint: implausible tensor count");
  for (std::uint64_t k = 0; k < count; ++k) {
    auto [name, t] = detail::read_tensor(is);
    if (name == "data/pretrained") {
      ck.pretrained.table = t;
    } else {
      if (!ck.tensors.emplace(name, std::move(t)).second)
        throw data_error("checkpoint: duplicate tensor " + name);
    }
  }
  if (ck.pretrained.dim > 0) {
    if (!ck.pretrained.table.is_matrix() || ck.pretrained.table.cols() != ck.pretrained.dim ||
        ck.pretrained.table.rows() != static_cast<int>(ck.pretrained.words.size()) + 1)
      throw data_error("checkpoint: pretrained table does not match its word list");
    for (size_t k = 0; k < ck.pretrained.words.size(); ++k)
      ck.pretrained.index[ck.pretrained.words[k]] = static_cast<int>(k) + 1;
  } else {
    ck.pretrained = PretrainedTable{};
  }
  return ck;
}

// Copies checkpoint weights into a freshly created model's store. Every
// parameter must be present with the right shape, and nothing extra allowed.
inline void restore_parameters(ParameterStore& store, const Checkpoint& ck) {
  size_t used = 0;
  for (Parameter* p : store.all()) {
    auto it = ck.tensors.find(p->name);
    if (it == ck.tensors.end())
      throw data_error("checkpoint is missing tensor " + p->name);
    if (it->second.shape != p->value.shape)
      throw data_error(detail::cat("checkpoint tensor ", p->name, " has shape ",
                                   shape_str(it->second.shape), ", model expects ",
                                   shape_str(p->value.shape)));
    p->value = it->second;
    ++used;
  }
  if (used != ck.tensors.size())
    throw data_error(detail::cat("checkpoint has ", ck.tensors.size(), " tensors, model binds ",
                                 used));
}

inline std::map<std::string, Tensor> snapshot_parameters(const ParameterStore& store) {
  std::map<std::string, Tensor> out;
  for (const Parameter* p : store.all()) out[p->name] = p->value;
  return out;
}

}  // namespace framespan
