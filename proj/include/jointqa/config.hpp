#pragma once

#include <nlohmann/json.hpp>

#include <stdexcept>
#include <string>

namespace jointqa {

enum class LossKind { Loss1, Loss2 };

inline std::string to_string(LossKind k) { return k == LossKind::Loss1 ? "loss1" : "loss2"; }
inline LossKind loss_kind_from_string(const std::string& s) {
  if (s == "loss1") return LossKind::Loss1;
  if (s == "loss2") return LossKind::Loss2;
  throw std::invalid_argument("unknown loss: " + s + " (expected loss1 or loss2)");
}

/// Model dimensions and architectural switches. f = 2*d_lstm + 8*d_char_emb
/// + d_bert is always derived, never stored.
struct ModelConfig {
  int d_lstm = 8;
  int d_char_emb = 4;
  int d_bert = 32;
  int char_cnn_kernel = 5;
  int char_embed_dim = 8;
  int encoder_layers = 2;
  int encoder_heads = 4;
  int max_positions = 512;  // length cap for the word encoder input
  double dropout = 0.0;
  bool cls_ablation = false;    // swap in the [CLS]-state classifier for P(A)
  unsigned long long seed = 7;

  int fused_dim() const { return 2 * d_lstm + 8 * d_char_emb + d_bert; }

  void validate() const {
    if (d_lstm < 1 || d_char_emb < 1 || d_bert < 1 || char_embed_dim < 1)
      throw std::invalid_argument("model dims must be >= 1");
    if (char_cnn_kernel < 1 || char_cnn_kernel % 2 == 0)
      throw std::invalid_argument("char_cnn_kernel must be odd and >= 1");
    if (encoder_layers < 1 || encoder_heads < 1)
      throw std::invalid_argument("encoder_layers/heads must be >= 1");
    if (d_bert % encoder_heads != 0)
      throw std::invalid_argument("d_bert must be divisible by encoder_heads");
    if (dropout < 0.0 || dropout >= 1.0) throw std::invalid_argument("dropout must be in [0,1)");
    if (max_positions < 4) throw std::invalid_argument("max_positions too small");
  }
};

inline void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = nlohmann::json{{"d_lstm", c.d_lstm},
                     {"d_char_emb", c.d_char_emb},
                     {"d_bert", c.d_bert},
                     {"char_cnn_kernel", c.char_cnn_kernel},
                     {"char_embed_dim", c.char_embed_dim},
                     {"encoder_layers", c.encoder_layers},
                     {"encoder_heads", c.encoder_heads},
                     {"max_positions", c.max_positions},
                     {"dropout", c.dropout},
                     {"cls_ablation", c.cls_ablation},
                     {"seed", c.seed}};
}

inline void from_json(const nlohmann::json& j, ModelConfig& c) {
  j.at("d_lstm").get_to(c.d_lstm);
  j.at("d_char_emb").get_to(c.d_char_emb);
  j.at("d_bert").get_to(c.d_bert);
  j.at("char_cnn_kernel").get_to(c.char_cnn_kernel);
  j.at("char_embed_dim").get_to(c.char_embed_dim);
  j.at("encoder_layers").get_to(c.encoder_layers);
  j.at("encoder_heads").get_to(c.encoder_heads);
  j.at("max_positions").get_to(c.max_positions);
  j.at("dropout").get_to(c.dropout);
  j.at("cls_ablation").get_to(c.cls_ablation);
  j.at("seed").get_to(c.seed);
}

enum class Schedule { Constant, LinearDecayToZero };

inline std::string to_string(Schedule s) {
  return s == Schedule::Constant ? "constant" : "linear_decay_to_zero";
}
inline Schedule schedule_from_string(const std::string& s) {
  if (s == "constant") return Schedule::Constant;
  if (s == "linear_decay_to_zero") return Schedule::LinearDecayToZero;
  throw std::invalid_argument("unknown schedule: " + s);
}

struct TrainConfig {
  ModelConfig model;
  double lr = 5e-5;
  int epochs = 3;
  int batch_size = 8;
  LossKind loss = LossKind::Loss1;
  bool loss1_single_answer_term = false;  // drop the duplicated -log P(A=0) inside loss1's no-answer term
  Schedule schedule = Schedule::LinearDecayToZero;
  double warmup_fraction = 0.1;
  int eval_every = 50;  // steps between dev evaluations; 0 disables them
  double weight_decay = 0.01;
  bool use_float64 = false;  // 32-bit training by default; 64-bit for verification
  unsigned long long seed = 7;

  void validate() const {
    model.validate();
    if (lr <= 0) throw std::invalid_argument("lr must be > 0");
    if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
    if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
    if (warmup_fraction < 0.0 || warmup_fraction >= 1.0)
      throw std::invalid_argument("warmup_fraction must be in [0,1)");
    if (eval_every < 0) throw std::invalid_argument("eval_every must be >= 0");
    if (weight_decay < 0) throw std::invalid_argument("weight_decay must be >= 0");
  }
};

inline void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = nlohmann::json{{"model", c.model},
                     {"lr", c.lr},
                     {"epochs", c.epochs},
                     {"batch_size", c.batch_size},
                     {"loss", to_string(c.loss)},
                     {"loss1_single_answer_term", c.loss1_single_answer_term},
                     {"schedule", to_string(c.schedule)},
                     {"warmup_fraction", c.warmup_fraction},
                     {"eval_every", c.eval_every},
                     {"weight_decay", c.weight_decay},
                     {"use_float64", c.use_float64},
                     {"seed", c.seed}};
}

inline void from_json(const nlohmann::json& j, TrainConfig& c) {
  j.at("model").get_to(c.model);
  j.at("lr").get_to(c.lr);
  j.at("epochs").get_to(c.epochs);
  j.at("batch_size").get_to(c.batch_size);
  c.loss = loss_kind_from_string(j.at("loss").get<std::string>());
  j.at("loss1_single_answer_term").get_to(c.loss1_single_answer_term);
  c.schedule = schedule_from_string(j.at("schedule").get<std::string>());
  j.at("warmup_fraction").get_to(c.warmup_fraction);
  j.at("eval_every").get_to(c.eval_every);
  j.at("weight_decay").get_to(c.weight_decay);
  j.at("use_float64").get_to(c.use_float64);
  j.at("seed").get_to(c.seed);
}

}  // namespace jointqa
