// Command-line front end: preprocess squad-style JSON into features, train,
// evaluate, predict, sweep the hyperparameter grid, and finite-difference
// check gradients. Every subcommand exits nonzero on failure.
#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "jointqa/checkpoint.hpp"
#include "jointqa/features.hpp"
#include "jointqa/gradcheck.hpp"
#include "jointqa/gridsearch.hpp"
#include "jointqa/metrics.hpp"
#include "jointqa/model.hpp"
#include "jointqa/squad.hpp"
#include "jointqa/tokenizer.hpp"
#include "jointqa/train.hpp"
#include "jointqa/vocab.hpp"

using namespace jointqa;
using ordered_json = nlohmann::ordered_json;

namespace {

int g_exit = 0;

struct CliConfig {
  TrainConfig train;
  std::string loss_name = "loss1";
  std::string schedule_name = "linear_decay_to_zero";
  std::string config_path;  // expanded before parsing; kept for --help

  void resolve() {
    train.loss = loss_kind_from_string(loss_name);
    train.schedule = schedule_from_string(schedule_name);
    train.validate();
  }
};

std::string trim_copy(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

/// Turns "epochs = 40" lines into "--epochs=40" tokens. Blank lines and lines
/// starting with '#' or ';' are skipped; values may be quoted.
std::vector<std::string> config_file_tokens(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::vector<std::string> toks;
  std::string line;
  while (std::getline(in, line)) {
    std::string s = trim_copy(line);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    auto eq = s.find('=');
    if (eq == std::string::npos) throw std::runtime_error("config line missing '=': " + s);
    std::string key = trim_copy(s.substr(0, eq));
    std::string val = trim_copy(s.substr(eq + 1));
    if (key.empty()) throw std::runtime_error("config line missing key: " + s);
    if (val.size() >= 2 && (val.front() == '"' || val.front() == '\'') &&
        val.back() == val.front())
      val = val.substr(1, val.size() - 2);
    if (key.rfind("--", 0) != 0) key = "--" + key;
    toks.push_back(key + "=" + val);
  }
  return toks;
}

/// Splices the contents of any `--config FILE` into the argument list right
/// after the subcommand name, so flags given explicitly on the command line
/// take precedence (every scalar option keeps its last occurrence).
std::vector<std::string> expand_config_args(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      break;
    }
    if (a.rfind("--config=", 0) == 0) {
      path = a.substr(9);
      break;
    }
  }
  if (path.empty()) return args;
  std::vector<std::string> toks = config_file_tokens(path);
  auto sub = std::find_if(args.begin(), args.end(),
                          [](const std::string& a) { return !a.empty() && a[0] != '-'; });
  if (sub == args.end()) throw std::runtime_error("--config requires a subcommand");
  args.insert(sub + 1, toks.begin(), toks.end());
  return args;
}

/// Lets an option appear both in a config file and on the command line; the
/// later (command line) occurrence wins. List-valued options are left alone.
void allow_config_overrides(CLI::App* cmd) {
  for (CLI::Option* o : cmd->get_options())
    if (o->get_expected_max() <= 1) o->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
}

void add_model_flags(CLI::App* cmd, ModelConfig& m) {
  cmd->add_option("--d-lstm", m.d_lstm, "span-stage LSTM width per direction")
      ->capture_default_str();
  cmd->add_option("--d-char-emb", m.d_char_emb, "char CNN output width")->capture_default_str();
  cmd->add_option("--d-bert", m.d_bert, "word encoder width")->capture_default_str();
  cmd->add_option("--char-cnn-kernel", m.char_cnn_kernel, "char convolution kernel (odd)")
      ->capture_default_str();
  cmd->add_option("--char-embed-dim", m.char_embed_dim, "char embedding width")
      ->capture_default_str();
  cmd->add_option("--encoder-layers", m.encoder_layers, "word encoder depth")
      ->capture_default_str();
  cmd->add_option("--encoder-heads", m.encoder_heads, "word encoder attention heads")
      ->capture_default_str();
  cmd->add_option("--max-positions", m.max_positions, "word encoder length cap")
      ->capture_default_str();
  cmd->add_option("--dropout", m.dropout, "dropout rate on the prediction stream")
      ->capture_default_str();
  cmd->add_flag("--cls-ablation", m.cls_ablation,
                "read answerability off the [CLS] state instead of the pooled summary");
  cmd->add_option("--model-seed", m.seed, "parameter init seed")->capture_default_str();
}

void add_train_flags(CLI::App* cmd, CliConfig& c) {
  add_model_flags(cmd, c.train.model);
  cmd->add_option("--lr", c.train.lr, "peak learning rate")->capture_default_str();
  cmd->add_option("--epochs", c.train.epochs, "passes over the training features")
      ->capture_default_str();
  cmd->add_option("--batch-size", c.train.batch_size, "examples per optimizer step")
      ->capture_default_str();
  cmd->add_option("--loss", c.loss_name, "training objective")
      ->check(CLI::IsMember({"loss1", "loss2"}))
      ->capture_default_str();
  cmd->add_flag("--loss1-single-answer-term", c.train.loss1_single_answer_term,
                "count the no-answer probability once in the first objective");
  cmd->add_option("--schedule", c.schedule_name, "learning rate schedule after warmup")
      ->check(CLI::IsMember({"constant", "linear_decay_to_zero"}))
      ->capture_default_str();
  cmd->add_option("--warmup-fraction", c.train.warmup_fraction, "linear warmup fraction")
      ->capture_default_str();
  cmd->add_option("--eval-every", c.train.eval_every, "steps between dev evaluations (0 = off)")
      ->capture_default_str();
  cmd->add_option("--weight-decay", c.train.weight_decay, "decoupled weight decay")
      ->capture_default_str();
  cmd->add_flag("--use-float64", c.train.use_float64, "train in 64-bit instead of 32-bit");
  cmd->add_option("--seed", c.train.seed, "shuffling/dropout seed")->capture_default_str();
  cmd->add_option("--config", c.config_path,
                  "read any of these options from a plain key = value file");
  allow_config_overrides(cmd);
}

struct VocabPair {
  PieceVocab pieces;
  CharVocab chars;
};

VocabPair load_vocabs(const std::string& pieces_path, const std::string& chars_path) {
  return {PieceVocab::load(pieces_path), CharVocab::load(chars_path)};
}

DevSet build_dev(const std::string& features_path, const std::string& squad_path) {
  DevSet dev;
  dev.features = read_features_jsonl(features_path);
  std::set<std::string> featured;
  for (const Feature& f : dev.features) featured.insert(f.example_id);
  for (const Example& ex : load_squad(squad_path)) {
    if (!featured.count(ex.id)) continue;
    dev.contexts[ex.id] = ex.context;
    std::vector<std::string>& g = dev.golds[ex.id];
    for (const Answer& a : ex.answers) g.push_back(a.text);
  }
  return dev;
}

void write_predictions(const std::string& path, const std::map<std::string, std::string>& preds) {
  ordered_json j = ordered_json::object();
  for (const auto& [id, text] : preds) j[id] = text;
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write predictions: " + path);
  out << j.dump(2) << '\n';
}

std::map<std::string, std::string> read_predictions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open predictions: " + path);
  ordered_json j = ordered_json::parse(in);
  std::map<std::string, std::string> preds;
  for (const auto& [id, text] : j.items()) preds[id] = text.get<std::string>();
  return preds;
}

template <typename S>
void run_train(const CliConfig& cli, const std::string& features_path,
               const std::string& pieces_path, const std::string& chars_path,
               const std::string& dev_features, const std::string& dev_squad,
               const std::string& out_dir) {
  VocabPair v = load_vocabs(pieces_path, chars_path);
  std::vector<Feature> features = read_features_jsonl(features_path);
  Model<S> model(cli.train.model, static_cast<Eigen::Index>(v.pieces.size()),
                 static_cast<Eigen::Index>(v.chars.size()));
  std::optional<DevSet> dev;
  if (!dev_features.empty()) dev = build_dev(dev_features, dev_squad);

  Trainer<S> trainer(model, cli.train, out_dir);
  TrainResult res = trainer.train(features, dev ? &*dev : nullptr);

  ordered_json j;
  j["steps"] = res.steps;
  j["final_train_loss"] = res.final_train_loss;
  if (res.best_dev_f1 >= 0.0) j["best_dev_f1"] = res.best_dev_f1;
  if (!res.best_checkpoint.empty()) j["best_checkpoint"] = res.best_checkpoint;
  j["aborted"] = res.aborted;
  if (res.aborted) {
    j["abort_message"] = res.abort_message;
    g_exit = 1;
  }
  std::cout << j.dump(2) << std::endl;
}

template <typename S>
void run_predict(const TrainConfig& tc, const std::string& checkpoint,
                 const std::string& features_path, const std::string& squad_path,
                 const std::string& pieces_path, const std::string& chars_path,
                 const std::string& out_path) {
  VocabPair v = load_vocabs(pieces_path, chars_path);
  Model<S> model(tc.model, static_cast<Eigen::Index>(v.pieces.size()),
                 static_cast<Eigen::Index>(v.chars.size()));
  load_checkpoint(checkpoint, model.params());
  std::vector<Feature> features = read_features_jsonl(features_path);
  std::unordered_map<std::string, std::string> contexts;
  for (const Example& ex : load_squad(squad_path)) contexts[ex.id] = ex.context;
  auto preds = predict_all(model, features, contexts);
  write_predictions(out_path, preds);
  ordered_json j;
  j["predictions"] = preds.size();
  j["out"] = out_path;
  std::cout << j.dump(2) << std::endl;
}

template <typename S>
void run_gridsearch(const CliConfig& base, const GridAxes& axes,
                    const std::string& features_path, const std::string& pieces_path,
                    const std::string& chars_path, const std::string& dev_features,
                    const std::string& dev_squad, const std::string& results_path) {
  VocabPair v = load_vocabs(pieces_path, chars_path);
  std::vector<Feature> features = read_features_jsonl(features_path);
  DevSet dev = build_dev(dev_features, dev_squad);

  auto run_one = [&](const GridPoint& p) {
    TrainConfig tc = base.train;
    tc.lr = p.lr;
    tc.model.d_char_emb = p.d_char_emb;
    tc.model.d_lstm = p.d_lstm;
    Model<S> model(tc.model, static_cast<Eigen::Index>(v.pieces.size()),
                   static_cast<Eigen::Index>(v.chars.size()));
    Trainer<S> trainer(model, tc);
    TrainResult res = trainer.train(features);
    if (res.aborted) throw std::runtime_error(res.abort_message);
    DevReport rep = evaluate_model(model, tc, dev);
    GridResult r;
    r.ok = true;
    r.dev_f1 = rep.metrics.f1;
    r.dev_em = rep.metrics.em;
    r.dev_avna = rep.metrics.avna;
    return r;
  };
  auto ranked = run_grid(axes, results_path, run_one);
  for (const GridResult& r : ranked) {
    ordered_json j;
    j["lr"] = r.point.lr;
    j["d_char_emb"] = r.point.d_char_emb;
    j["d_lstm"] = r.point.d_lstm;
    j["ok"] = r.ok;
    if (r.ok) {
      j["dev_f1"] = r.dev_f1;
      j["dev_em"] = r.dev_em;
      j["dev_avna"] = r.dev_avna;
    } else {
      j["error"] = r.error;
    }
    std::cout << j.dump() << '\n';
  }
}

Feature probe_feature() {
  Feature f;
  f.example_id = "probe";
  auto piece = [](int pid, std::size_t off) {
    Piece p;
    p.piece_id = pid;
    p.byte_begin = off;
    p.byte_end = off + 2;
    p.char_ids = {2 + pid % 3, 2 + (pid + 1) % 3, 0, 0};
    return p;
  };
  for (int k = 0; k < 3; ++k) f.question.push_back(piece(4 + k, 3 * static_cast<std::size_t>(k)));
  for (int k = 0; k < 4; ++k) f.context.push_back(piece(5 + k, 3 * static_cast<std::size_t>(k)));
  return f;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"joint answerability + span model over dual-granularity encodings"};
  app.require_subcommand(1);

  // ---- preprocess ----
  auto* prep = app.add_subcommand("preprocess", "tokenize and align a squad-style JSON file");
  std::string prep_squad, prep_pieces, prep_chars, prep_out;
  FeaturizeOptions prep_opt;
  prep->add_option("--squad", prep_squad, "input JSON")->required();
  prep->add_option("--pieces", prep_pieces, "wordpiece vocabulary file")->required();
  prep->add_option("--chars", prep_chars, "char vocabulary file (built from the data if absent)")
      ->required();
  prep->add_option("--out", prep_out, "output features JSONL")->required();
  prep->add_option("--max-context-pieces", prep_opt.max_context_pieces, "context truncation")
      ->capture_default_str();
  prep->add_option("--max-question-pieces", prep_opt.max_question_pieces, "question truncation")
      ->capture_default_str();
  prep->callback([&] {
    std::vector<Example> examples = load_squad(prep_squad);
    PieceVocab pieces = PieceVocab::load(prep_pieces);
    CharVocab chars;
    if (std::filesystem::exists(prep_chars)) {
      chars = CharVocab::load(prep_chars);
    } else {
      std::vector<std::string> texts;
      for (const Example& ex : examples) {
        texts.push_back(ex.context);
        texts.push_back(ex.question);
      }
      chars = CharVocab::build(texts);
      chars.save(prep_chars);
    }
    Tokenizer tok(&pieces, &chars);
    FeaturizeStats stats;
    std::vector<Feature> features = featurize(examples, tok, prep_opt, &stats);
    write_features_jsonl(prep_out, features);
    ordered_json j;
    j["total"] = stats.total;
    j["truncated"] = stats.truncated;
    j["dropped"] = stats.dropped;
    j["unanswerable"] = stats.unanswerable;
    j["out"] = prep_out;
    std::cout << j.dump(2) << std::endl;
  });

  // ---- train ----
  auto* tr = app.add_subcommand("train", "fit the model on preprocessed features");
  CliConfig tr_cfg;
  std::string tr_features, tr_pieces, tr_chars, tr_dev_features, tr_dev_squad, tr_out_dir;
  tr->add_option("--train-features", tr_features, "training features JSONL")->required();
  tr->add_option("--pieces", tr_pieces, "wordpiece vocabulary file")->required();
  tr->add_option("--chars", tr_chars, "char vocabulary file")->required();
  tr->add_option("--out-dir", tr_out_dir, "checkpoint/log directory")->required();
  tr->add_option("--dev-features", tr_dev_features, "dev features JSONL");
  tr->add_option("--dev-squad", tr_dev_squad, "dev JSON (contexts and gold answers)")
      ->needs(tr->get_option("--dev-features"));
  add_train_flags(tr, tr_cfg);
  tr->callback([&] {
    if (!tr_dev_features.empty() && tr_dev_squad.empty())
      throw CLI::ValidationError("--dev-features requires --dev-squad");
    tr_cfg.resolve();
    if (tr_cfg.train.use_float64)
      run_train<double>(tr_cfg, tr_features, tr_pieces, tr_chars, tr_dev_features, tr_dev_squad,
                        tr_out_dir);
    else
      run_train<float>(tr_cfg, tr_features, tr_pieces, tr_chars, tr_dev_features, tr_dev_squad,
                       tr_out_dir);
  });

  // ---- evaluate ----
  auto* ev = app.add_subcommand("evaluate", "score a predictions file against gold answers");
  std::string ev_preds, ev_squad, ev_per_example;
  ev->add_option("--predictions", ev_preds, "JSON object mapping id to answer (\"\" = no answer)")
      ->required();
  ev->add_option("--squad", ev_squad, "gold JSON")->required();
  ev->add_option("--per-example", ev_per_example, "also write per-example scores as JSONL");
  ev->callback([&] {
    std::map<std::string, std::string> preds = read_predictions(ev_preds);
    std::map<std::string, std::vector<std::string>> golds;
    for (const Example& ex : load_squad(ev_squad)) {
      std::vector<std::string>& g = golds[ex.id];
      for (const Answer& a : ex.answers) g.push_back(a.text);
    }
    std::vector<ExampleScore> rows;
    EvalReport rep = evaluate(preds, golds, &rows);
    if (!ev_per_example.empty()) {
      std::ofstream out(ev_per_example, std::ios::trunc);
      if (!out) throw std::runtime_error("cannot write per-example scores: " + ev_per_example);
      for (const ExampleScore& r : rows) {
        ordered_json j;
        j["id"] = r.id;
        j["f1"] = r.f1;
        j["em"] = r.em;
        j["avna_match"] = r.avna_match;
        out << j.dump() << '\n';
      }
    }
    ordered_json j;
    j["f1"] = rep.f1;
    j["em"] = rep.em;
    j["avna"] = rep.avna;
    j["total"] = rep.total;
    std::cout << j.dump(2) << std::endl;
  });

  // ---- predict ----
  auto* pr = app.add_subcommand("predict", "decode answers with a trained checkpoint");
  std::string pr_ckpt, pr_features, pr_squad, pr_pieces, pr_chars, pr_out;
  pr->add_option("--checkpoint", pr_ckpt, "trained checkpoint")->required();
  pr->add_option("--features", pr_features, "features JSONL to decode")->required();
  pr->add_option("--squad", pr_squad, "JSON with the raw contexts")->required();
  pr->add_option("--pieces", pr_pieces, "wordpiece vocabulary file")->required();
  pr->add_option("--chars", pr_chars, "char vocabulary file")->required();
  pr->add_option("--out", pr_out, "output predictions JSON")->required();
  pr->callback([&] {
    TrainConfig tc = read_checkpoint_config(pr_ckpt);
    if (tc.use_float64)
      run_predict<double>(tc, pr_ckpt, pr_features, pr_squad, pr_pieces, pr_chars, pr_out);
    else
      run_predict<float>(tc, pr_ckpt, pr_features, pr_squad, pr_pieces, pr_chars, pr_out);
  });

  // ---- gridsearch ----
  auto* gs = app.add_subcommand("gridsearch", "sweep learning rate and width settings");
  CliConfig gs_cfg;
  std::string gs_features, gs_pieces, gs_chars, gs_dev_features, gs_dev_squad, gs_results;
  bool gs_enumerate_only = false;
  GridAxes gs_axes = default_grid_axes();
  gs->add_option("--train-features", gs_features, "training features JSONL");
  gs->add_option("--pieces", gs_pieces, "wordpiece vocabulary file");
  gs->add_option("--chars", gs_chars, "char vocabulary file");
  gs->add_option("--dev-features", gs_dev_features, "dev features JSONL");
  gs->add_option("--dev-squad", gs_dev_squad, "dev JSON");
  gs->add_option("--results", gs_results, "results JSONL (resumed if it exists)");
  gs->add_flag("--enumerate-only", gs_enumerate_only, "print the settings without training");
  gs->add_option("--axes-lr", gs_axes.lr, "learning rate axis")->delimiter(',');
  gs->add_option("--axes-d-char-emb", gs_axes.d_char_emb, "char width axis")->delimiter(',');
  gs->add_option("--axes-d-lstm", gs_axes.d_lstm, "LSTM width axis")->delimiter(',');
  add_train_flags(gs, gs_cfg);
  gs->callback([&] {
    if (gs_enumerate_only) {
      for (const GridPoint& p : enumerate_grid(gs_axes)) {
        ordered_json j;
        j["lr"] = p.lr;
        j["d_char_emb"] = p.d_char_emb;
        j["d_lstm"] = p.d_lstm;
        std::cout << j.dump() << '\n';
      }
      return;
    }
    for (const auto& [flag, value] :
         std::initializer_list<std::pair<const char*, const std::string*>>{
             {"--train-features", &gs_features},
             {"--pieces", &gs_pieces},
             {"--chars", &gs_chars},
             {"--dev-features", &gs_dev_features},
             {"--dev-squad", &gs_dev_squad},
             {"--results", &gs_results}})
      if (value->empty()) throw CLI::ValidationError(std::string(flag) + " is required");
    gs_cfg.resolve();
    if (gs_cfg.train.use_float64)
      run_gridsearch<double>(gs_cfg, gs_axes, gs_features, gs_pieces, gs_chars, gs_dev_features,
                             gs_dev_squad, gs_results);
    else
      run_gridsearch<float>(gs_cfg, gs_axes, gs_features, gs_pieces, gs_chars, gs_dev_features,
                            gs_dev_squad, gs_results);
  });

  // ---- gradcheck ----
  auto* gc = app.add_subcommand("gradcheck",
                                "compare analytic and finite-difference gradients in 64-bit");
  ModelConfig gc_model;
  gc_model.d_lstm = 2;
  gc_model.d_char_emb = 3;
  gc_model.d_bert = 4;
  gc_model.char_cnn_kernel = 3;
  gc_model.char_embed_dim = 2;
  gc_model.encoder_layers = 1;
  gc_model.encoder_heads = 2;
  gc_model.max_positions = 16;
  std::string gc_loss = "loss1", gc_branch = "answerable";
  GradCheckOptions gc_opt;
  gc_opt.eps = 1e-6;
  add_model_flags(gc, gc_model);
  gc->add_option("--loss", gc_loss, "objective to differentiate")
      ->check(CLI::IsMember({"loss1", "loss2"}))
      ->capture_default_str();
  gc->add_option("--branch", gc_branch, "gold branch to exercise")
      ->check(CLI::IsMember({"answerable", "no-answer"}))
      ->capture_default_str();
  gc->add_option("--eps", gc_opt.eps, "central-difference step")->capture_default_str();
  gc->add_option("--tol", gc_opt.tol, "relative-error threshold")->capture_default_str();
  gc->add_option("--max-entries", gc_opt.max_entries_per_param,
                 "entries checked per tensor (0 = all)")
      ->capture_default_str();
  gc->add_option("--sample-seed", gc_opt.seed, "entry subsampling seed")->capture_default_str();
  std::string gc_config_path;
  gc->add_option("--config", gc_config_path,
                 "read any of these options from a plain key = value file");
  allow_config_overrides(gc);
  gc->callback([&] {
    gc_model.validate();
    Model<double> model(gc_model, /*piece_vocab_size=*/12, /*char_vocab_size=*/8);
    Feature f = probe_feature();
    GoldLabel gold;
    if (gc_branch == "answerable") {
      gold.answerable = 1;
      gold.start = 1;
      gold.end = 2;
    }
    LossKind kind = loss_kind_from_string(gc_loss);
    auto loss_value = [&]() {
      Graph<double> g;
      ModelOutput<double> out = model.forward(g, f);
      Expr<double> loss =
          kind == LossKind::Loss1
              ? loss1_graph(g, out.joint.p_answer, out.joint.p_start, out.joint.p_end, gold)
              : loss2_graph(g, out.joint.p_answer, out.joint.p_start, out.joint.p_end, gold);
      return static_cast<double>(loss.value()(0, 0));
    };
    auto build = [&]() {
      Graph<double> g;
      ModelOutput<double> out = model.forward(g, f);
      Expr<double> loss =
          kind == LossKind::Loss1
              ? loss1_graph(g, out.joint.p_answer, out.joint.p_start, out.joint.p_end, gold)
              : loss2_graph(g, out.joint.p_answer, out.joint.p_start, out.joint.p_end, gold);
      g.backward(loss);
      return static_cast<double>(loss.value()(0, 0));
    };
    GradCheckReport rep = grad_check<double>(model.params(), build, loss_value, gc_opt);
    ordered_json j;
    j["checked"] = rep.checked;
    j["max_rel_err"] = rep.max_rel_err;
    j["worst_param"] = rep.worst.param;
    j["worst_row"] = rep.worst.row;
    j["worst_col"] = rep.worst.col;
    j["failures"] = rep.failures.size();
    j["tol"] = rep.tol;
    j["ok"] = rep.ok();
    std::cout << j.dump(2) << std::endl;
    if (!rep.ok()) g_exit = 1;
  });

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = expand_config_args(std::move(args));
    std::reverse(args.begin(), args.end());
    app.parse(std::move(args));
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
  return g_exit;
}
