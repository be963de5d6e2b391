#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "jointqa/checkpoint.hpp"
#include "jointqa/config.hpp"
#include "jointqa/metrics.hpp"
#include "jointqa/model.hpp"
#include "jointqa/objectives.hpp"
#include "jointqa/runlog.hpp"

namespace jointqa {

/// Adam with decoupled weight decay. Moments live on the parameters.
template <typename S>
class AdamW {
 public:
  AdamW(double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8,
        double weight_decay = 0.01)
      : beta1_(beta1), beta2_(beta2), eps_(eps), wd_(weight_decay) {}

  void step(ParameterStore<S>& ps, double lr) {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (auto& p : ps) {
      if (p->m.size() == 0) p->m.setZero(p->value.rows(), p->value.cols());
      if (p->v.size() == 0) p->v.setZero(p->value.rows(), p->value.cols());
      p->m = static_cast<S>(beta1_) * p->m + static_cast<S>(1.0 - beta1_) * p->grad;
      p->v = (static_cast<S>(beta2_) * p->v.array() +
              static_cast<S>(1.0 - beta2_) * p->grad.array().square())
                 .matrix();
      auto m_hat = (p->m.array() / static_cast<S>(bc1)).eval();
      auto v_hat = (p->v.array() / static_cast<S>(bc2)).eval();
      p->value.array() -= static_cast<S>(lr) *
                          (m_hat / (v_hat.sqrt() + static_cast<S>(eps_)) +
                           static_cast<S>(wd_) * p->value.array());
    }
  }

  long long updates() const { return t_; }

 private:
  double beta1_, beta2_, eps_, wd_;
  long long t_ = 0;
};

/// Learning rate at 1-indexed step t of total_steps: linear warmup over the
/// first warmup_fraction of steps, then either constant or linear decay that
/// reaches zero at total_steps.
inline double schedule_lr(const TrainConfig& cfg, long long t, long long total_steps) {
  if (t < 1 || total_steps < 1) throw std::invalid_argument("schedule_lr: bad step");
  auto warm = static_cast<long long>(cfg.warmup_fraction * static_cast<double>(total_steps));
  if (warm > 0 && t <= warm)
    return cfg.lr * static_cast<double>(t) / static_cast<double>(warm);
  if (cfg.schedule == Schedule::Constant) return cfg.lr;
  if (total_steps == warm) return 0.0;
  double frac = static_cast<double>(total_steps - t) / static_cast<double>(total_steps - warm);
  return cfg.lr * std::max(0.0, frac);
}

/// Dev-time evaluation bundle: featurized examples plus what metric
/// computation needs (raw contexts to recover span text, gold answers).
struct DevSet {
  std::vector<Feature> features;
  std::unordered_map<std::string, std::string> contexts;  // id -> raw context
  std::map<std::string, std::vector<std::string>> golds;  // id -> answers ([] = no answer)
};

template <typename S>
Expr<S> example_loss_graph(Graph<S>& g, const TrainConfig& cfg, const ModelOutput<S>& out,
                           const GoldLabel& gold) {
  if (cfg.loss == LossKind::Loss1)
    return loss1_graph(g, out.joint.p_answer, out.joint.p_start, out.joint.p_end, gold,
                       cfg.loss1_single_answer_term);
  return loss2_graph(g, out.joint.p_answer, out.joint.p_start, out.joint.p_end, gold);
}

/// Greedy decode of every feature into an answer string ("" = no answer).
template <typename S>
std::map<std::string, std::string> predict_all(
    const Model<S>& model, const std::vector<Feature>& features,
    const std::unordered_map<std::string, std::string>& contexts) {
  std::map<std::string, std::string> out;
  for (const Feature& f : features) {
    Graph<S> g;
    ModelOutput<S> mo = model.forward(g, f);
    Prediction pred = decode(posterior_values(mo.joint, mo.real_len));
    std::string text;
    if (pred.answerable) {
      auto it = contexts.find(f.example_id);
      if (it == contexts.end())
        throw std::runtime_error("no context available for example " + f.example_id);
      text = span_text(it->second, f.context, pred.start, pred.end);
    }
    out[f.example_id] = std::move(text);
  }
  return out;
}

struct DevReport {
  EvalReport metrics;
  double nll = 0.0;  // mean loss over scorable dev features
};

template <typename S>
DevReport evaluate_model(const Model<S>& model, const TrainConfig& cfg, const DevSet& dev) {
  DevReport rep;
  rep.metrics = evaluate(predict_all(model, dev.features, dev.contexts), dev.golds);
  std::vector<double> losses;
  for (const Feature& f : dev.features) {
    if (!f.gold) continue;
    Graph<S> g;
    ModelOutput<S> mo = model.forward(g, f);
    losses.push_back(
        static_cast<double>(example_loss_graph(g, cfg, mo, *f.gold).value()(0, 0)));
  }
  if (!losses.empty()) rep.nll = batch_loss(losses);
  return rep;
}

struct TrainResult {
  long long steps = 0;
  double final_train_loss = 0.0;
  double best_dev_f1 = -1.0;
  std::string best_checkpoint;
  bool aborted = false;
  std::string abort_message;
};

/// Minibatch trainer: per-example graphs, mean loss per batch, one AdamW step
/// per batch, JSONL step log, best-dev-F1 checkpointing. A non-finite batch
/// loss saves the pre-step parameters and stops.
template <typename S>
class Trainer {
 public:
  Trainer(Model<S>& model, TrainConfig cfg, std::string out_dir = {})
      : model_(model), cfg_(std::move(cfg)), out_dir_(std::move(out_dir)),
        opt_(0.9, 0.999, 1e-8, cfg_.weight_decay) {
    cfg_.validate();
    if (!out_dir_.empty()) {
      std::filesystem::create_directories(out_dir_);
      log_.emplace(out_dir_ + "/run_log.jsonl");
    }
  }

  TrainResult train(const std::vector<Feature>& train_features, const DevSet* dev = nullptr) {
    std::vector<const Feature*> usable;
    for (const Feature& f : train_features)
      if (f.gold) usable.push_back(&f);
    if (usable.empty()) throw std::invalid_argument("no trainable features (all dropped?)");

    const long long batches_per_epoch =
        (static_cast<long long>(usable.size()) + cfg_.batch_size - 1) / cfg_.batch_size;
    const long long total_steps = batches_per_epoch * cfg_.epochs;
    std::mt19937_64 shuffle_rng(static_cast<std::uint64_t>(cfg_.seed));
    std::mt19937_64 dropout_rng(static_cast<std::uint64_t>(cfg_.seed) + 0x9e3779b9ULL);

    TrainResult res;
    long long step = 0;
    for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
      std::vector<std::size_t> order(usable.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::shuffle(order.begin(), order.end(), shuffle_rng);
      for (long long b = 0; b < batches_per_epoch; ++b) {
        std::size_t lo = static_cast<std::size_t>(b) * static_cast<std::size_t>(cfg_.batch_size);
        std::size_t hi = std::min(order.size(), lo + static_cast<std::size_t>(cfg_.batch_size));
        ++step;
        model_.params().zero_grads();
        std::vector<double> losses;
        const S inv_n = S(1) / static_cast<S>(hi - lo);
        for (std::size_t k = lo; k < hi; ++k) {
          const Feature& f = *usable[order[k]];
          Graph<S> g;
          ForwardOptions fo;
          fo.training = true;
          fo.rng = &dropout_rng;
          ModelOutput<S> mo = model_.forward(g, f, fo);
          Expr<S> loss = example_loss_graph(g, cfg_, mo, *f.gold);
          losses.push_back(static_cast<double>(loss.value()(0, 0)));
          g.backward(scale(loss, inv_n));
        }
        double mean = batch_loss(losses);
        if (!std::isfinite(mean)) {
          if (!out_dir_.empty())
            save_checkpoint(out_dir_ + "/last_good.ckpt", model_.params(), cfg_);
          res.aborted = true;
          res.abort_message = "non-finite batch loss " + std::to_string(mean) + " at step " +
                              std::to_string(step) +
                              "; pre-step parameters saved as last_good.ckpt";
          res.steps = step;
          res.final_train_loss = mean;
          return res;
        }
        double lr = schedule_lr(cfg_, step, total_steps);
        opt_.step(model_.params(), lr);

        RunRecord rec;
        rec.step = step;
        rec.train_loss = mean;
        rec.lr = lr;
        bool eval_now = dev && cfg_.eval_every > 0 &&
                        (step % cfg_.eval_every == 0 || step == total_steps);
        if (eval_now) {
          DevReport dr = evaluate_model(model_, cfg_, *dev);
          rec.dev_f1 = dr.metrics.f1;
          rec.dev_em = dr.metrics.em;
          rec.dev_avna = dr.metrics.avna;
          rec.dev_nll = dr.nll;
          if (dr.metrics.f1 > res.best_dev_f1) {
            res.best_dev_f1 = dr.metrics.f1;
            if (!out_dir_.empty()) {
              res.best_checkpoint = out_dir_ + "/best.ckpt";
              save_checkpoint(res.best_checkpoint, model_.params(), cfg_);
            }
          }
        }
        if (log_) log_->write(rec);
        res.final_train_loss = mean;
      }
    }
    res.steps = step;
    if (!out_dir_.empty()) save_checkpoint(out_dir_ + "/last.ckpt", model_.params(), cfg_);
    return res;
  }

 private:
  Model<S>& model_;
  TrainConfig cfg_;
  std::string out_dir_;
  AdamW<S> opt_;
  std::optional<RunLog> log_;
};

}  // namespace jointqa
