#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "framespan/checkpoint.hpp"
#include "framespan/metrics.hpp"
#include "framespan/model.hpp"
#include "framespan/predict.hpp"
#include "framespan/train.hpp"

namespace {

using namespace framespan;

// wrong flag combinations that CLI11 cannot express; mapped to exit 1
struct usage_error {
  std::string msg;
};

// gold spans are only excluded against b when building training instances
constexpr int kKeepAllSpans = 1 << 20;

void drain_warnings(std::vector<std::string>& warnings) {
  for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
  warnings.clear();
}

struct TrainArgs {
  std::string train_path, dev_path, ontology_path, pretrained_path, trees_path;
  std::string out_path, config_path;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
};

Config assemble_config(const TrainArgs& a) {
  Config cfg;
  if (!a.config_path.empty()) cfg.load_file(a.config_path);
  for (const std::string& kv : a.overrides) cfg.set_pair(kv);
  cfg.seed = a.seed;
  for (const std::string& w : cfg.validate()) std::cerr << "warning: " << w << "\n";
  return cfg;
}

int run_train_arg(const TrainArgs& a) {
  Config cfg = assemble_config(a);
  FrameOntology onto = load_ontology(a.ontology_path);

  std::vector<std::string> warnings;
  std::vector<AnnotatedSentence> train_sents = load_corpus(a.train_path, &warnings);
  std::vector<AnnotatedSentence> dev_sents;
  if (!a.dev_path.empty()) dev_sents = load_corpus(a.dev_path, &warnings);
  std::vector<ScaffoldInstance> trees;
  if (!a.trees_path.empty()) trees = load_trees(a.trees_path, cfg.max_span_length);
  if (!trees.empty() && cfg.delta <= 0) {
    std::cerr << "warning: --trees given but delta = 0; dropping "
              << trees.size() << " treebank sentences\n";
    trees.clear();
  }
  PretrainedTable pre;
  if (!a.pretrained_path.empty()) pre = load_pretrained(a.pretrained_path, &warnings);
  const PretrainedTable* pre_ptr = pre.dim > 0 ? &pre : nullptr;

  Vocabulary vocab = build_vocabulary(train_sents, trees);
  std::vector<ArgInstance> train_insts =
      build_instances(train_sents, onto, cfg.max_span_length, &warnings);
  std::vector<ArgInstance> dev_insts = build_instances(dev_sents, onto, kKeepAllSpans, &warnings);
  drain_warnings(warnings);

  std::vector<std::vector<std::pair<int, int>>> positives;
  if (cfg.delta > 0)
    for (const ArgInstance& inst : train_insts)
      positives.push_back(
          scaffold_from_sentence(train_sents[inst.sentence_index], cfg.max_span_length)
              .positive_spans);

  ParameterStore store;
  Rng rng(cfg.seed);
  ArgModel model = ArgModel::create(store, cfg, vocab, onto, pre.dim, rng);
  std::cerr << "training on " << train_insts.size() << " instances, " << trees.size()
            << " treebank sentences, dev " << dev_insts.size() << "\n";
  TrainResult res = train_arg(store, model, cfg, vocab, onto, pre_ptr, train_insts, positives,
                              trees, dev_insts, &std::cerr);

  Checkpoint ck;
  ck.kind = "argument";
  ck.config = cfg;
  ck.vocab = vocab;
  ck.ontology = onto;
  ck.pretrained = pre;
  ck.best_dev_metric = res.best_metric;
  ck.adam_steps = res.updates;
  ck.tensors = snapshot_parameters(store);
  save_checkpoint(a.out_path, ck);
  std::cout << "wrote " << a.out_path << " (best dev F1 " << res.best_metric << " at epoch "
            << res.best_epoch << ", " << res.updates << " updates)\n";
  return 0;
}

int run_train_frame(const TrainArgs& a) {
  Config cfg = assemble_config(a);
  FrameOntology onto = load_ontology(a.ontology_path);

  std::vector<std::string> warnings;
  std::vector<AnnotatedSentence> train_sents = load_corpus(a.train_path, &warnings);
  std::vector<AnnotatedSentence> dev_sents;
  if (!a.dev_path.empty()) dev_sents = load_corpus(a.dev_path, &warnings);
  PretrainedTable pre;
  if (!a.pretrained_path.empty()) pre = load_pretrained(a.pretrained_path, &warnings);
  const PretrainedTable* pre_ptr = pre.dim > 0 ? &pre : nullptr;

  Vocabulary vocab = build_vocabulary(train_sents);
  std::vector<ArgInstance> train_insts = build_instances(train_sents, onto, kKeepAllSpans, &warnings);
  std::vector<ArgInstance> dev_insts = build_instances(dev_sents, onto, kKeepAllSpans, &warnings);
  drain_warnings(warnings);

  ParameterStore store;
  Rng rng(cfg.seed);
  FrameIdParams model = FrameIdParams::create(
      store, cfg, static_cast<int>(vocab.words.size()), static_cast<int>(vocab.pos_tags.size()),
      static_cast<int>(onto.frame_names.size()), static_cast<int>(onto.lu_names.size()), pre.dim,
      rng);
  std::cerr << "training on " << train_insts.size() << " targets, dev " << dev_insts.size()
            << "\n";
  TrainResult res =
      train_frame(store, model, cfg, vocab, onto, pre_ptr, train_insts, dev_insts, &std::cerr);

  Checkpoint ck;
  ck.kind = "frame";
  ck.config = cfg;
  ck.vocab = vocab;
  ck.ontology = onto;
  ck.pretrained = pre;
  ck.best_dev_metric = res.best_metric;
  ck.adam_steps = res.updates;
  ck.tensors = snapshot_parameters(store);
  save_checkpoint(a.out_path, ck);
  std::cout << "wrote " << a.out_path << " (best dev accuracy " << res.best_metric
            << " at epoch " << res.best_epoch << ", " << res.updates << " updates)\n";
  return 0;
}

struct PredictArgs {
  std::vector<std::string> model_paths, frame_model_paths;
  std::string input_path, output_path, mode;
};

int run_predict(const PredictArgs& a) {
  if (a.mode != "frames" && a.model_paths.empty())
    throw usage_error{"mode " + a.mode + " needs at least one --model"};
  if (a.mode != "args-gold-frames" && a.frame_model_paths.empty())
    throw usage_error{"mode " + a.mode + " needs at least one --frame-model"};

  std::vector<std::unique_ptr<LoadedArgModel>> arg_members;
  if (a.mode != "frames")
    for (const std::string& p : a.model_paths) arg_members.push_back(LoadedArgModel::open(p));
  std::vector<std::unique_ptr<LoadedFrameModel>> frame_members;
  if (a.mode != "args-gold-frames")
    for (const std::string& p : a.frame_model_paths)
      frame_members.push_back(LoadedFrameModel::open(p));

  const FrameOntology& onto =
      arg_members.empty() ? frame_members[0]->ck.ontology : arg_members[0]->ck.ontology;
  std::vector<std::string> warnings;
  std::vector<AnnotatedSentence> sents = load_corpus(a.input_path, &warnings);
  std::vector<ArgInstance> insts = build_instances(sents, onto, kKeepAllSpans, &warnings);
  drain_warnings(warnings);

  std::ofstream os(a.output_path, std::ios::binary);
  if (!os) throw data_error("cannot open output file: " + a.output_path);
  if (a.mode == "frames") {
    std::vector<int> frames = predict_frames(frame_members, insts);
    write_predictions(os, insts, onto, &frames, nullptr);
  } else if (a.mode == "args-gold-frames") {
    std::vector<Segmentation> segs = predict_arguments(arg_members, insts);
    write_predictions(os, insts, onto, nullptr, &segs);
  } else {
    auto [frames, segs] = predict_end_to_end(frame_members, arg_members, insts);
    write_predictions(os, insts, onto, &frames, &segs);
  }
  if (!os) throw data_error("failed writing " + a.output_path);
  std::cout << "wrote " << insts.size() << " predictions to " << a.output_path << "\n";
  return 0;
}

struct EvaluateArgs {
  std::string gold_path, pred_path, ontology_path, mode;
};

int run_evaluate(const EvaluateArgs& a) {
  FrameOntology onto = load_ontology(a.ontology_path);
  std::vector<std::string> warnings;
  std::vector<AnnotatedSentence> gold_sents = load_corpus(a.gold_path, &warnings);
  std::vector<ArgInstance> gold_insts = build_instances(gold_sents, onto, kKeepAllSpans, &warnings);
  drain_warnings(warnings);

  std::ifstream is(a.pred_path, std::ios::binary);
  if (!is) throw data_error("cannot open predictions file: " + a.pred_path);
  std::vector<Prediction> preds = read_predictions(is);
  std::map<std::string, const Prediction*> by_id;
  for (const Prediction& p : preds)
    if (!by_id.emplace(p.instance_id, &p).second)
      throw data_error("duplicate prediction for instance " + p.instance_id);
  if (preds.size() != gold_insts.size())
    throw data_error(detail::cat("prediction/gold mismatch: ", preds.size(), " predictions vs ",
                                 gold_insts.size(), " gold instances"));

  std::vector<int> pred_frames, gold_frames;
  std::vector<std::vector<Segment>> pred_segs, gold_segs;
  for (const ArgInstance& inst : gold_insts) {
    auto it = by_id.find(inst.id);
    if (it == by_id.end()) throw data_error("no prediction for instance " + inst.id);
    const Prediction& p = *it->second;
    int pf = onto.frame_id(p.frame);
    if (pf < 0)
      throw data_error(detail::cat("instance ", inst.id, ": unknown frame ", p.frame));
    if (a.mode == "args-gold-frames" && pf != inst.frame_id)
      throw data_error(detail::cat("instance ", inst.id, ": predicted frame ", p.frame,
                                   " disagrees with gold; evaluate with --mode end-to-end"));
    pred_frames.push_back(pf);
    gold_frames.push_back(inst.frame_id);
    gold_segs.push_back(inst.gold);
    std::vector<Segment> ps;
    for (const auto& [i, j, role] : p.segments) {
      int y = onto.label_of_role(pf, role);
      if (y < 0)
        throw data_error(detail::cat("instance ", inst.id, ": frame ", p.frame,
                                     " has no role ", role));
      ps.push_back({i, j, y});
    }
    pred_segs.push_back(std::move(ps));
  }

  FrameReport fr;
  EvalReport er;
  const FrameReport* fr_ptr = nullptr;
  const EvalReport* er_ptr = nullptr;
  if (a.mode == "frames" || a.mode == "end-to-end") {
    fr = score_frames(pred_frames, gold_frames);
    fr_ptr = &fr;
  }
  if (a.mode == "args-gold-frames") {
    er = score_arguments(pred_segs, gold_segs);
    er_ptr = &er;
  } else if (a.mode == "end-to-end") {
    er = score_arguments(pred_segs, pred_frames, gold_segs, gold_frames);
    er_ptr = &er;
  }

  nlohmann::ordered_json out;
  out["mode"] = a.mode;
  out["instances"] = gold_insts.size();
  if (fr_ptr) out["frames"] = report_to_json(fr);
  if (er_ptr) out["arguments"] = report_to_json(er);
  std::cout << out.dump(2) << "\n" << format_reports(fr_ptr, er_ptr);
  return 0;
}

int run_inspect(const std::string& path) {
  Checkpoint ck = load_checkpoint(path);
  std::cout << "kind: " << ck.kind << "\n"
            << "best_dev_metric: " << ck.best_dev_metric << "\n"
            << "adam_steps: " << ck.adam_steps << "\n"
            << "vocabulary: " << ck.vocab.words.size() << " words, " << ck.vocab.pos_tags.size()
            << " pos tags\n"
            << "ontology: " << ck.ontology.frame_names.size() << " frames, "
            << ck.ontology.lu_names.size() << " lexical units, "
            << ck.ontology.role_names.size() << " role rows\n"
            << "pretrained: dim " << ck.pretrained.dim << ", " << ck.pretrained.words.size()
            << " rows\n"
            << "config: " << ck.config.to_json().dump() << "\n";
  size_t total = 0;
  std::cout << "tensors:\n";
  for (const auto& [name, t] : ck.tensors) {
    std::cout << "  " << name << " " << shape_str(t.shape) << "\n";
    total += t.v.size();
  }
  std::cout << "total parameters: " << total << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"segmental frame-semantic parser: train, predict, evaluate"};
  app.require_subcommand(1);

  TrainArgs ta;
  CLI::App* train_arg_cmd = app.add_subcommand("train-arg", "train an argument-id model");
  train_arg_cmd->add_option("--train", ta.train_path, "training corpus (jsonl)")->required();
  train_arg_cmd->add_option("--dev", ta.dev_path, "development corpus for model selection");
  train_arg_cmd->add_option("--ontology", ta.ontology_path, "frame ontology (json)")->required();
  train_arg_cmd->add_option("--pretrained", ta.pretrained_path, "pretrained embeddings (text)");
  train_arg_cmd->add_option("--trees", ta.trees_path, "bracketed trees for the scaffold task");
  train_arg_cmd->add_option("--seed", ta.seed, "initialization seed")->required();
  train_arg_cmd->add_option("--out", ta.out_path, "checkpoint to write")->required();
  train_arg_cmd->add_option("--config", ta.config_path, "key = value config file");
  train_arg_cmd->add_option("--set", ta.overrides, "config override key=value");

  TrainArgs tf;
  CLI::App* train_frame_cmd = app.add_subcommand("train-frame", "train a frame-id model");
  train_frame_cmd->add_option("--train", tf.train_path, "training corpus (jsonl)")->required();
  train_frame_cmd->add_option("--dev", tf.dev_path, "development corpus for model selection");
  train_frame_cmd->add_option("--ontology", tf.ontology_path, "frame ontology (json)")->required();
  train_frame_cmd->add_option("--pretrained", tf.pretrained_path, "pretrained embeddings (text)");
  train_frame_cmd->add_option("--seed", tf.seed, "initialization seed")->required();
  train_frame_cmd->add_option("--out", tf.out_path, "checkpoint to write")->required();
  train_frame_cmd->add_option("--config", tf.config_path, "key = value config file");
  train_frame_cmd->add_option("--set", tf.overrides, "config override key=value");

  PredictArgs pa;
  CLI::App* predict_cmd = app.add_subcommand("predict", "decode with one or more checkpoints");
  predict_cmd->add_option("--model", pa.model_paths, "argument-id checkpoint (repeat to ensemble)");
  predict_cmd->add_option("--frame-model", pa.frame_model_paths,
                          "frame-id checkpoint (repeat to ensemble)");
  predict_cmd->add_option("--input", pa.input_path, "corpus to decode (jsonl)")->required();
  predict_cmd->add_option("--output", pa.output_path, "predictions file to write")->required();
  predict_cmd
      ->add_option("--mode", pa.mode, "args-gold-frames, frames, or end-to-end")
      ->default_val("args-gold-frames")
      ->check(CLI::IsMember({"args-gold-frames", "frames", "end-to-end"}));

  EvaluateArgs ea;
  CLI::App* evaluate_cmd = app.add_subcommand("evaluate", "score a predictions file");
  evaluate_cmd->add_option("--gold", ea.gold_path, "gold corpus (jsonl)")->required();
  evaluate_cmd->add_option("--pred", ea.pred_path, "predictions file (jsonl)")->required();
  evaluate_cmd->add_option("--ontology", ea.ontology_path, "frame ontology (json)")->required();
  evaluate_cmd
      ->add_option("--mode", ea.mode, "args-gold-frames, frames, or end-to-end")
      ->default_val("args-gold-frames")
      ->check(CLI::IsMember({"args-gold-frames", "frames", "end-to-end"}));

  std::string inspect_path;
  CLI::App* inspect_cmd = app.add_subcommand("inspect-checkpoint", "describe a checkpoint");
  inspect_cmd->add_option("--model", inspect_path, "checkpoint to describe")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);  // prints the message; 0 for --help
    return code == 0 ? 0 : 1;
  }

  try {
    if (*train_arg_cmd) return run_train_arg(ta);
    if (*train_frame_cmd) return run_train_frame(tf);
    if (*predict_cmd) return run_predict(pa);
    if (*evaluate_cmd) return run_evaluate(ea);
    if (*inspect_cmd) return run_inspect(inspect_path);
  } catch (const usage_error& e) {
    std::cerr << "usage error: " << e.msg << "\n";
    return 1;
  } catch (const numeric_error& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const data_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
