#pragma once

#include <optional>
#include <random>

#include "jointqa/char_cnn.hpp"
#include "jointqa/config.hpp"
#include "jointqa/encoder.hpp"
#include "jointqa/features.hpp"
#include "jointqa/fusion.hpp"
#include "jointqa/graph.hpp"
#include "jointqa/posterior.hpp"
#include "jointqa/predictor.hpp"

namespace jointqa {

template <typename S>
struct ModelOutput {
  JointPosterior<S> joint;  // start/end padded with exact zeros up to pad_to
  Expr<S> cls;              // [d_bert x 1]
  Mask mask;                // 1 on the real prefix
  Eigen::Index real_len = 0;
};

struct ForwardOptions {
  Eigen::Index pad_to = 0;        // 0 = no padding
  bool training = false;          // enables dropout when dropout > 0
  std::mt19937_64* rng = nullptr;  // required when dropout is active
};

template <typename S>
class Model {
 public:
  Model(ModelConfig cfg, Eigen::Index piece_vocab_size, Eigen::Index char_vocab_size)
      : cfg_(std::move(cfg)),
        piece_vocab_size_(piece_vocab_size),
        char_vocab_size_(char_vocab_size) {
    cfg_.validate();
    char_cnn_ = make_char_cnn<S>(params_, cfg_, char_vocab_size);
    encoder_ = make_encoder<S>(params_, cfg_, piece_vocab_size);
    fusion_ = make_fusion<S>(params_, cfg_);
    predictor_ = make_predictor<S>(params_, cfg_);
    init_params();
  }

  const ModelConfig& config() const { return cfg_; }
  ParameterStore<S>& params() { return params_; }
  const ParameterStore<S>& params() const { return params_; }
  Eigen::Index piece_vocab_size() const { return piece_vocab_size_; }
  Eigen::Index char_vocab_size() const { return char_vocab_size_; }

  /// Number of forwards that read answerability off the [CLS] state.
  long cls_calls() const { return cls_calls_; }

  ModelOutput<S> forward(Graph<S>& g, const Feature& feat,
                         const ForwardOptions& opt = {}) const {
    if (feat.context.size() < 2)
      throw std::invalid_argument("example " + feat.example_id +
                                  ": need at least 2 context pieces");
    std::vector<int> q_ids = piece_ids(feat.question);
    std::vector<int> c_ids = piece_ids(feat.context);
    EncoderOutput<S> enc =
        encoder_encode(g, encoder_, q_ids, c_ids, feat.example_id);
    Expr<S> char_c = char_cnn_encode(g, char_cnn_, feat.context);
    Expr<S> char_q = char_cnn_encode(g, char_cnn_, feat.question);
    FusedContext<S> fused = fuse(g, fusion_, enc.context, char_c, char_q);
    Expr<S> stream = maybe_dropout(g, fused.f, opt);
    std::optional<Expr<S>> cls_in;
    if (cfg_.cls_ablation) {
      cls_in = enc.cls;
      ++cls_calls_;
    }
    JointPosterior<S> jp = predict_joint(g, predictor_, stream, cls_in);

    ModelOutput<S> out;
    out.cls = enc.cls;
    out.real_len = static_cast<Eigen::Index>(feat.context.size());
    Eigen::Index L = out.real_len;
    Eigen::Index target = opt.pad_to > L ? opt.pad_to : L;
    out.mask.assign(static_cast<std::size_t>(target), 0);
    for (Eigen::Index k = 0; k < L; ++k) out.mask[static_cast<std::size_t>(k)] = 1;
    if (target > L) {
      Expr<S> zeros_tail = g.zeros(1, target - L);
      jp.p_start = hcat<S>({jp.p_start, zeros_tail});
      jp.p_end = hcat<S>({jp.p_end, zeros_tail});
    }
    out.joint = jp;
    return out;
  }

 private:
  static std::vector<int> piece_ids(const std::vector<Piece>& pieces) {
    std::vector<int> ids;
    ids.reserve(pieces.size());
    for (const auto& p : pieces) ids.push_back(p.piece_id);
    return ids;
  }

  Expr<S> maybe_dropout(Graph<S>&, Expr<S> x, const ForwardOptions& opt) const {
    if (!opt.training || cfg_.dropout <= 0.0) return x;
    if (!opt.rng) throw std::invalid_argument("dropout requires an RNG");
    const S inv_keep = S(1) / static_cast<S>(1.0 - cfg_.dropout);
    std::bernoulli_distribution keep(1.0 - cfg_.dropout);
    Mat<S> mask(x.rows(), x.cols());
    for (Eigen::Index c = 0; c < x.cols(); ++c)
      for (Eigen::Index r = 0; r < x.rows(); ++r)
        mask(r, c) = keep(*opt.rng) ? inv_keep : S(0);
    return dropout_mask(x, std::move(mask));
  }

  void init_params() {
    std::mt19937_64 rng(static_cast<std::uint64_t>(cfg_.seed));
    for (auto& p : params_) {
      // fan-in of the linear map the tensor implements: columns for matrices,
      // rows for weight vectors used through dot products
      Eigen::Index fan = p->value.cols() > 1 ? p->value.cols() : p->value.rows();
      const S bound = S(1) / static_cast<S>(std::sqrt(static_cast<double>(fan)));
      std::uniform_real_distribution<double> dist(-static_cast<double>(bound),
                                                  static_cast<double>(bound));
      for (Eigen::Index c = 0; c < p->value.cols(); ++c)
        for (Eigen::Index r = 0; r < p->value.rows(); ++r)
          p->value(r, c) = static_cast<S>(dist(rng));
    }
    for (auto& p : params_) {
      const std::string& n = p->name;
      auto ends_with = [&n](const char* suffix) {
        std::string s(suffix);
        return n.size() >= s.size() && n.compare(n.size() - s.size(), s.size(), s) == 0;
      };
      if (ends_with("gamma")) p->value.setOnes();
      if (ends_with("beta")) p->value.setZero();
      if (ends_with(".fwd.b") || ends_with(".bwd.b")) {
        p->value.setZero();
        const Eigen::Index h = p->value.rows() / 4;
        p->value.block(h, 0, h, 1).setConstant(S(1));  // forget gate bias
      }
    }
  }

  ModelConfig cfg_;
  Eigen::Index piece_vocab_size_;
  Eigen::Index char_vocab_size_;
  ParameterStore<S> params_;
  CharCnnParams<S> char_cnn_;
  EncoderParams<S> encoder_;
  FusionParams<S> fusion_;
  PredictorParams<S> predictor_;
  mutable long cls_calls_ = 0;
};

/// Snapshot of the factorized posterior as plain numbers (first real_len
/// positions; -1 = all).
template <typename S>
PosteriorValues posterior_values(const JointPosterior<S>& jp, Eigen::Index real_len = -1) {
  PosteriorValues pv;
  pv.answer = {static_cast<double>(jp.p_answer.value()(0, 0)),
               static_cast<double>(jp.p_answer.value()(1, 0))};
  Eigen::Index L = real_len >= 0 ? real_len : jp.p_start.cols();
  pv.start.resize(static_cast<std::size_t>(L));
  pv.end.resize(static_cast<std::size_t>(L));
  for (Eigen::Index k = 0; k < L; ++k) {
    pv.start[static_cast<std::size_t>(k)] = static_cast<double>(jp.p_start.value()(0, k));
    pv.end[static_cast<std::size_t>(k)] = static_cast<double>(jp.p_end.value()(0, k));
  }
  return pv;
}

}  // namespace jointqa
