#pragma once

#include <string>

#include "jointqa/config.hpp"
#include "jointqa/graph.hpp"
#include "jointqa/lstm.hpp"

namespace jointqa {

/// Attention flow between a context stream h_c [d x L_c] and a question
/// stream h_q [d x L_q]. The similarity weight w_sim [3d x 1] splits into
/// [w_c; w_q; w_m] so that
///   S(i, j) = w_c . c_i + w_q . q_j + w_m . (c_i * q_j).
/// Output is [4d x L_c]: the context stream, the context-to-question summary,
/// and the two elementwise-gated variants.
template <typename S>
Expr<S> attention_flow(Graph<S>& g, Expr<S> h_c, Expr<S> h_q, Expr<S> w_sim) {
  const Eigen::Index d = h_c.rows();
  detail::gcheck(h_q.rows() == d, "attention_flow: stream widths disagree");
  detail::gcheck(w_sim.rows() == 3 * d && w_sim.cols() == 1, "attention_flow: w_sim shape");
  const Eigen::Index lc = h_c.cols(), lq = h_q.cols();
  Expr<S> w_c = slice_rows(w_sim, 0, d);
  Expr<S> w_q = slice_rows(w_sim, d, d);
  Expr<S> w_m = slice_rows(w_sim, 2 * d, d);

  Expr<S> ones_row_q = g.constant(Mat<S>::Ones(1, lq));
  Expr<S> ones_col_c = g.constant(Mat<S>::Ones(lc, 1));
  Expr<S> ones_row_c = g.constant(Mat<S>::Ones(1, lc));

  Expr<S> c_term = matmul(transpose(h_c), w_c);                      // [L_c x 1]
  Expr<S> q_term = matmul(transpose(h_q), w_q);                      // [L_q x 1]
  Expr<S> gated = cmul(h_c, matmul(w_m, ones_row_c));                // [d x L_c]
  Expr<S> sim = add(add(matmul(c_term, ones_row_q),                  // broadcast over j
                        matmul(ones_col_c, transpose(q_term))),      // broadcast over i
                    matmul(transpose(gated), h_q));                  // [L_c x L_q]

  Expr<S> a = softmax_rows(sim);            // context-to-question attention
  Expr<S> u = matmul(h_q, transpose(a));    // [d x L_c]

  Expr<S> b = softmax_rows(transpose(rowwise_max(sim)));  // [1 x L_c]
  Expr<S> h_tilde = matmul(h_c, transpose(b));             // [d x 1]
  Expr<S> h_tilde_b = matmul(h_tilde, ones_row_c);         // [d x L_c]

  return vcat<S>({h_c, u, cmul(h_c, u), cmul(h_c, h_tilde_b)});
}

template <typename S>
struct FusionParams {
  BiLstmParams<S> char_ctx;   // contextualizes char-CNN piece vectors
  Parameter<S>* w_sim = nullptr;
  BiLstmParams<S> modeling1;  // two-layer modeling stack over the merged streams
  BiLstmParams<S> modeling2;
};

template <typename S>
FusionParams<S> make_fusion(ParameterStore<S>& ps, const ModelConfig& cfg) {
  FusionParams<S> p;
  p.char_ctx = make_bilstm<S>(ps, "char_ctx", cfg.d_char_emb, cfg.d_char_emb);
  p.w_sim = &ps.create("attn_flow.w_sim", 3 * (2 * cfg.d_char_emb), 1);
  const int merged = cfg.d_bert + 8 * cfg.d_char_emb;
  p.modeling1 = make_bilstm<S>(ps, "modeling.l1", merged, cfg.d_lstm);
  p.modeling2 = make_bilstm<S>(ps, "modeling.l2", 2 * cfg.d_lstm, cfg.d_lstm);
  return p;
}

template <typename S>
struct FusedContext {
  Expr<S> g_ctx;  // [d_bert + 8*d_char_emb x L_c] merged word + char streams
  Expr<S> m;      // [2*d_lstm x L_c] modeling output
  Expr<S> f;      // vcat(g_ctx, m), the prediction stream
};

/// Merges the word-granularity encoding t_word [d_bert x L_c] with the
/// char-granularity attention-flow stream and runs the two-layer modeling
/// stack. char_c/char_q are raw char-CNN outputs [d_char_emb x L].
template <typename S>
FusedContext<S> fuse(Graph<S>& g, const FusionParams<S>& p, Expr<S> t_word, Expr<S> char_c,
                     Expr<S> char_q) {
  Expr<S> h_c = bilstm_run(g, p.char_ctx, char_c);  // [2*d_char_emb x L_c]
  Expr<S> h_q = bilstm_run(g, p.char_ctx, char_q);
  Expr<S> t_char = attention_flow(g, h_c, h_q, g.param(*p.w_sim));  // [8*d_char_emb x L_c]
  FusedContext<S> out;
  out.g_ctx = vcat<S>({t_word, t_char});
  Expr<S> m1 = bilstm_run(g, p.modeling1, out.g_ctx);
  out.m = bilstm_run(g, p.modeling2, m1);
  out.f = vcat<S>({out.g_ctx, out.m});
  return out;
}

}  // namespace jointqa
