#pragma once

#include "jointqa/config.hpp"
#include "jointqa/graph.hpp"
#include "jointqa/lstm.hpp"

namespace jointqa {

template <typename S>
struct PredictorParams {
  Parameter<S>* answer_attn_w = nullptr;   // [f x 1]
  Parameter<S>* answer_logit_w = nullptr;  // [2 x f], no bias
  Parameter<S>* start_init_w = nullptr;    // [2*d_lstm x f]
  BiLstmParams<S> start_lstm;
  Parameter<S>* start_score_w = nullptr;   // [2*d_lstm x 1]
  Parameter<S>* end_init_w = nullptr;      // [2*d_lstm x (f + 2*d_lstm)]
  BiLstmParams<S> end_lstm;
  Parameter<S>* end_score_w = nullptr;     // [2*d_lstm x 1]
  Parameter<S>* cls_w = nullptr;           // [2 x d_bert], ablation head
  int d_lstm = 0;
};

template <typename S>
PredictorParams<S> make_predictor(ParameterStore<S>& ps, const ModelConfig& cfg) {
  PredictorParams<S> p;
  const int f = cfg.fused_dim();
  const int h = cfg.d_lstm;
  p.answer_attn_w = &ps.create("predictor.answer_attn_w", f, 1);
  p.answer_logit_w = &ps.create("predictor.answer_logit_w", 2, f);
  p.start_init_w = &ps.create("predictor.start_init_w", 2 * h, f);
  p.start_lstm = make_bilstm<S>(ps, "predictor.start_lstm", f, h);
  p.start_score_w = &ps.create("predictor.start_score_w", 2 * h, 1);
  p.end_init_w = &ps.create("predictor.end_init_w", 2 * h, f + 2 * h);
  p.end_lstm = make_bilstm<S>(ps, "predictor.end_lstm", f, h);
  p.end_score_w = &ps.create("predictor.end_score_w", 2 * h, 1);
  p.cls_w = &ps.create("predictor.cls_w", 2, cfg.d_bert);
  p.d_lstm = cfg.d_lstm;
  return p;
}

template <typename S>
struct JointPosterior {
  Expr<S> p_answer;  // [2 x 1], row 0 = no answer, row 1 = answer
  Expr<S> p_start;   // [1 x L]
  Expr<S> p_end;     // [1 x L]
};

/// Three-stage factorized posterior over (answerable, start, end).
/// Stage A pools the prediction stream f_ctx [f x L] with a learned
/// attention, classifies answerability, and propagates the pooled summary
/// into the start stage's recurrent state. Stage 1 scores start positions and
/// propagates its expected summary (with the stage-A summary) into the end
/// stage. Stage 2 scores end positions.
/// When cls is provided (ablation), answerability is read from the [CLS]
/// state instead of the pooled summary; the summary still propagates.
template <typename S>
JointPosterior<S> predict_joint(Graph<S>& g, const PredictorParams<S>& p, Expr<S> f_ctx,
                                std::optional<Expr<S>> cls = {}) {
  const int h = p.d_lstm;
  Expr<S> att_logits = matmul(transpose(g.param(*p.answer_attn_w)), f_ctx);  // [1 x L]
  Expr<S> att = softmax_rows(att_logits);
  Expr<S> s_a = matmul(f_ctx, transpose(att));  // [f x 1]

  JointPosterior<S> out;
  if (cls) {
    Expr<S> l_a = matmul(g.param(*p.cls_w), *cls);  // [2 x 1]
    out.p_answer = transpose(softmax_rows(transpose(l_a)));
  } else {
    Expr<S> l_a = matmul(g.param(*p.answer_logit_w), s_a);  // [2 x 1]
    out.p_answer = transpose(softmax_rows(transpose(l_a)));
  }

  Expr<S> init_a = matmul(g.param(*p.start_init_w), s_a);  // [2h x 1]
  Expr<S> h_a = slice_rows(init_a, 0, h);
  Expr<S> c_a = slice_rows(init_a, h, h);
  Expr<S> m1 = bilstm_run(g, p.start_lstm, f_ctx, std::optional<Expr<S>>(h_a),
                          std::optional<Expr<S>>(c_a));  // [2h x L]
  out.p_start = softmax_rows(matmul(transpose(g.param(*p.start_score_w)), m1));

  Expr<S> s_1 = matmul(m1, transpose(out.p_start));  // [2h x 1] expected summary
  Expr<S> init_1 = matmul(g.param(*p.end_init_w), vcat<S>({s_a, s_1}));
  Expr<S> h_1 = slice_rows(init_1, 0, h);
  Expr<S> c_1 = slice_rows(init_1, h, h);
  Expr<S> m2 = bilstm_run(g, p.end_lstm, f_ctx, std::optional<Expr<S>>(h_1),
                          std::optional<Expr<S>>(c_1));
  out.p_end = softmax_rows(matmul(transpose(g.param(*p.end_score_w)), m2));
  return out;
}

}  // namespace jointqa
