#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "framespan/error.hpp"

namespace framespan {

// Every hyperparameter, with the published defaults. Loaded from a key-value
// file ("key = value", # comments) and overridable with --set key=value.
struct Config {
  int hidden_size = 64;    // all LSTM hidden states and MLP hidden layers
  int dim_word = 60;
  int dim_pos = 4;
  int dim_frame = 100;
  int dim_lu = 64;
  int dim_role = 50;
  int dim_scaffold_label = 8;
  int dim_distance = 16;
  int distance_clamp = 20;  // token distances clamped to [-20, 20]
  int max_span_length = 20; // segment cap and scaffold span cap share it
  double alpha = 2.0;       // recall-oriented cost weight; 0 turns the cost off
  double delta = 0.17;      // scaffold loss weight
  double dropout = 0.05;
  double unk_prob = 0.1;    // frequency-1 word replacement probability
  double learning_rate = 0.0005;
  double adam_beta1 = 0.01;
  double adam_beta2 = 0.9999;
  double adam_eps = 1e-8;
  double clip_norm = 5.0;
  int epochs = 15;
  std::uint64_t seed = 0;      // training requires an explicit --seed
  std::uint64_t data_seed = 1; // shuffle/UNK/dropout stream, shared across ensemble members
  std::string numerator_mode = "marginal";  // or "canonical"
  int ensemble_size = 5;

  void set(const std::string& key, const std::string& value) {
    auto to_int = [&](int& field) {
      size_t pos = 0;
      int v;
      try {
        v = std::stoi(value, &pos);
      } catch (const std::exception&) {
        throw data_error(detail::cat("config: ", key, ": not an integer: ", value));
      }
      if (pos != value.size())
        throw data_error(detail::cat("config: ", key, ": not an integer: ", value));
      field = v;
    };
    auto to_double = [&](double& field) {
      size_t pos = 0;
      double v;
      try {
        v = std::stod(value, &pos);
      } catch (const std::exception&) {
        throw data_error(detail::cat("config: ", key, ": not a number: ", value));
      }
      if (pos != value.size())
        throw data_error(detail::cat("config: ", key, ": not a number: ", value));
      field = v;
    };
    if (key == "hidden_size") to_int(hidden_size);
    else if (key == "dim_word") to_int(dim_word);
    else if (key == "dim_pos") to_int(dim_pos);
    else if (key == "dim_frame") to_int(dim_frame);
    else if (key == "dim_lu") to_int(dim_lu);
    else if (key == "dim_role") to_int(dim_role);
    else if (key == "dim_scaffold_label") to_int(dim_scaffold_label);
    else if (key == "dim_distance") to_int(dim_distance);
    else if (key == "distance_clamp") to_int(distance_clamp);
    else if (key == "max_span_length") to_int(max_span_length);
    else if (key == "alpha") to_double(alpha);
    else if (key == "delta") to_double(delta);
    else if (key == "dropout") to_double(dropout);
    else if (key == "unk_prob") to_double(unk_prob);
    else if (key == "learning_rate") to_double(learning_rate);
    else if (key == "adam_beta1") to_double(adam_beta1);
    else if (key == "adam_beta2") to_double(adam_beta2);
    else if (key == "adam_eps") to_double(adam_eps);
    else if (key == "clip_norm") to_double(clip_norm);
    else if (key == "epochs") to_int(epochs);
    else if (key == "seed") {
      try {
        seed = std::stoull(value);
      } catch (const std::exception&) {
        throw data_error(detail::cat("config: seed: not an integer: ", value));
      }
    } else if (key == "data_seed") {
      try {
        data_seed = std::stoull(value);
      } catch (const std::exception&) {
        throw data_error(detail::cat("config: data_seed: not an integer: ", value));
      }
    } else if (key == "numerator_mode") {
      numerator_mode = value;
    } else if (key == "ensemble_size") {
      to_int(ensemble_size);
    } else {
      throw data_error("config: unknown key: " + key);
    }
  }

  // Hard violations throw; soft ones come back as warnings.
  std::vector<std::string> validate() const {
    auto positive = [](const char* name, auto v) {
      if (v <= 0) throw data_error(detail::cat("config: ", name, " must be positive, got ", v));
    };
    positive("hidden_size", hidden_size);
    positive("dim_word", dim_word);
    positive("dim_pos", dim_pos);
    positive("dim_frame", dim_frame);
    positive("dim_lu", dim_lu);
    positive("dim_role", dim_role);
    positive("dim_scaffold_label", dim_scaffold_label);
    positive("dim_distance", dim_distance);
    positive("distance_clamp", distance_clamp);
    positive("max_span_length", max_span_length);
    positive("learning_rate", learning_rate);
    positive("adam_eps", adam_eps);
    positive("clip_norm", clip_norm);
    positive("epochs", epochs);
    positive("ensemble_size", ensemble_size);
    if (alpha < 0) throw data_error(detail::cat("config: alpha must be >= 0, got ", alpha));
    if (delta < 0) throw data_error(detail::cat("config: delta must be >= 0, got ", delta));
    if (dropout < 0 || dropout >= 1)
      throw data_error(detail::cat("config: dropout must be in [0,1), got ", dropout));
    if (unk_prob < 0 || unk_prob > 1)
      throw data_error(detail::cat("config: unk_prob must be in [0,1], got ", unk_prob));
    if (adam_beta1 < 0 || adam_beta1 >= 1 || adam_beta2 < 0 || adam_beta2 >= 1)
      throw data_error("config: adam betas must be in [0,1)");
    if (numerator_mode != "marginal" && numerator_mode != "canonical")
      throw data_error("config: numerator_mode must be marginal or canonical, got " + numerator_mode);
    std::vector<std::string> warnings;
    if (delta >= 1)
      warnings.push_back(detail::cat("config: delta = ", delta,
                                     " does not de-emphasize the scaffold (expected < 1)"));
    return warnings;
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["hidden_size"] = hidden_size;
    j["dim_word"] = dim_word;
    j["dim_pos"] = dim_pos;
    j["dim_frame"] = dim_frame;
    j["dim_lu"] = dim_lu;
    j["dim_role"] = dim_role;
    j["dim_scaffold_label"] = dim_scaffold_label;
    j["dim_distance"] = dim_distance;
    j["distance_clamp"] = distance_clamp;
    j["max_span_length"] = max_span_length;
    j["alpha"] = alpha;
    j["delta"] = delta;
    j["dropout"] = dropout;
    j["unk_prob"] = unk_prob;
    j["learning_rate"] = learning_rate;
    j["adam_beta1"] = adam_beta1;
    j["adam_beta2"] = adam_beta2;
    j["adam_eps"] = adam_eps;
    j["clip_norm"] = clip_norm;
    j["epochs"] = epochs;
    j["seed"] = seed;
    j["data_seed"] = data_seed;
    j["numerator_mode"] = numerator_mode;
    j["ensemble_size"] = ensemble_size;
    return j;
  }

  static Config from_json(const nlohmann::ordered_json& j) {
    Config c;
    c.hidden_size = j.at("hidden_size").get<int>();
    c.dim_word = j.at("dim_word").get<int>();
    c.dim_pos = j.at("dim_pos").get<int>();
    c.dim_frame = j.at("dim_frame").get<int>();
    c.dim_lu = j.at("dim_lu").get<int>();
    c.dim_role = j.at("dim_role").get<int>();
    c.dim_scaffold_label = j.at("dim_scaffold_label").get<int>();
    c.dim_distance = j.at("dim_distance").get<int>();
    c.distance_clamp = j.at("distance_clamp").get<int>();
    c.max_span_length = j.at("max_span_length").get<int>();
    c.alpha = j.at("alpha").get<double>();
    c.delta = j.at("delta").get<double>();
    c.dropout = j.at("dropout").get<double>();
    c.unk_prob = j.at("unk_prob").get<double>();
    c.learning_rate = j.at("learning_rate").get<double>();
    c.adam_beta1 = j.at("adam_beta1").get<double>();
    c.adam_beta2 = j.at("adam_beta2").get<double>();
    c.adam_eps = j.at("adam_eps").get<double>();
    c.clip_norm = j.at("clip_norm").get<double>();
    c.epochs = j.at("epochs").get<int>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.data_seed = j.at("data_seed").get<std::uint64_t>();
    c.numerator_mode = j.at("numerator_mode").get<std::string>();
    c.ensemble_size = j.at("ensemble_size").get<int>();
    return c;
  }

  void load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open config file: " + path);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      size_t hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      auto trim = [](std::string s) {
        size_t a = s.find_first_not_of(" \t\r");
        if (a == std::string::npos) return std::string();
        size_t b = s.find_last_not_of(" \t\r");
        return s.substr(a, b - a + 1);
      };
      line = trim(line);
      if (line.empty()) continue;
      size_t eq = line.find('=');
      if (eq == std::string::npos)
        throw data_error(detail::cat("config ", path, " line ", line_no, ": expected key = value"));
      std::string key = trim(line.substr(0, eq));
      std::string value = trim(line.substr(eq + 1));
      if (key.empty() || value.empty())
        throw data_error(detail::cat("config ", path, " line ", line_no, ": expected key = value"));
      try {
        set(key, value);
      } catch (const data_error& e) {
        throw data_error(detail::cat("config ", path, " line ", line_no, ": ", e.what()));
      }
    }
  }

  // "key=value" as used by --set
  void set_pair(const std::string& pair) {
    size_t eq = pair.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 >= pair.size())
      throw data_error("expected key=value, got: " + pair);
    set(pair.substr(0, eq), pair.substr(eq + 1));
  }
};

}  // namespace framespan
