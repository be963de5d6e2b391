#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "jointqa/config.hpp"
#include "jointqa/graph.hpp"
#include "jointqa/vocab.hpp"

namespace jointqa {

template <typename S>
struct EncoderLayerParams {
  Parameter<S>*ln1_gamma, *ln1_beta;
  Parameter<S>*wq, *bq, *wk, *bk, *wv, *bv, *wo, *bo;
  Parameter<S>*ln2_gamma, *ln2_beta;
  Parameter<S>*ff1_w, *ff1_b, *ff2_w, *ff2_b;
};

template <typename S>
struct EncoderParams {
  Parameter<S>* tok_emb = nullptr;  // [d_bert x |pieces|]
  Parameter<S>* pos_emb = nullptr;  // [d_bert x max_positions]
  std::vector<EncoderLayerParams<S>> layers;
  int heads = 0;
  int d = 0;
  int max_positions = 0;
};

template <typename S>
EncoderParams<S> make_encoder(ParameterStore<S>& ps, const ModelConfig& cfg,
                              Eigen::Index piece_vocab_size) {
  EncoderParams<S> p;
  p.heads = cfg.encoder_heads;
  p.d = cfg.d_bert;
  p.max_positions = cfg.max_positions;
  const int d = cfg.d_bert;
  p.tok_emb = &ps.create("encoder.tok_emb", d, piece_vocab_size);
  p.pos_emb = &ps.create("encoder.pos_emb", d, cfg.max_positions);
  for (int l = 0; l < cfg.encoder_layers; ++l) {
    std::string pre = "encoder.l" + std::to_string(l) + ".";
    EncoderLayerParams<S> lp;
    lp.ln1_gamma = &ps.create(pre + "ln1.gamma", d, 1);
    lp.ln1_beta = &ps.create(pre + "ln1.beta", d, 1);
    lp.wq = &ps.create(pre + "wq", d, d);
    lp.bq = &ps.create(pre + "bq", d, 1);
    lp.wk = &ps.create(pre + "wk", d, d);
    lp.bk = &ps.create(pre + "bk", d, 1);
    lp.wv = &ps.create(pre + "wv", d, d);
    lp.bv = &ps.create(pre + "bv", d, 1);
    lp.wo = &ps.create(pre + "wo", d, d);
    lp.bo = &ps.create(pre + "bo", d, 1);
    lp.ln2_gamma = &ps.create(pre + "ln2.gamma", d, 1);
    lp.ln2_beta = &ps.create(pre + "ln2.beta", d, 1);
    lp.ff1_w = &ps.create(pre + "ff1_w", 4 * d, d);
    lp.ff1_b = &ps.create(pre + "ff1_b", 4 * d, 1);
    lp.ff2_w = &ps.create(pre + "ff2_w", d, 4 * d);
    lp.ff2_b = &ps.create(pre + "ff2_b", d, 1);
    p.layers.push_back(lp);
  }
  return p;
}

namespace detail {

/// Multi-head self attention over columns of x [d x T].
template <typename S>
Expr<S> self_attention(Graph<S>& g, const EncoderLayerParams<S>& lp, Expr<S> x, int heads) {
  const Eigen::Index d = x.rows();
  const Eigen::Index dh = d / heads;
  Expr<S> q = add_cols(matmul(g.param(*lp.wq), x), g.param(*lp.bq));
  Expr<S> k = add_cols(matmul(g.param(*lp.wk), x), g.param(*lp.bk));
  Expr<S> v = add_cols(matmul(g.param(*lp.wv), x), g.param(*lp.bv));
  std::vector<Expr<S>> outs;
  outs.reserve(static_cast<std::size_t>(heads));
  const S scale_k = S(1) / static_cast<S>(std::sqrt(static_cast<double>(dh)));
  for (int h = 0; h < heads; ++h) {
    Expr<S> qh = slice_rows(q, h * dh, dh);
    Expr<S> kh = slice_rows(k, h * dh, dh);
    Expr<S> vh = slice_rows(v, h * dh, dh);
    // rows index the query position, columns the key position
    Expr<S> scores = scale(matmul(transpose(qh), kh), scale_k);
    Expr<S> attn = softmax_rows(scores);
    outs.push_back(matmul(vh, transpose(attn)));
  }
  Expr<S> cat = vcat<S>(std::move(outs));
  return add_cols(matmul(g.param(*lp.wo), cat), g.param(*lp.bo));
}

}  // namespace detail

template <typename S>
struct EncoderOutput {
  Expr<S> context;  // [d_bert x L_c]
  Expr<S> cls;      // [d_bert x 1]
};

/// Word-granularity contextual encoding. Input sequence is
/// [CLS] question [SEP] context [SEP]; blocks are pre-norm residual
/// (x += Attn(LN(x)); x += FFN(LN(x))) with no final normalization, so a
/// zero-initialized stack passes the token + position signal through
/// unchanged. Returns the context slice and the [CLS] state.
template <typename S>
EncoderOutput<S> encoder_encode(Graph<S>& g, const EncoderParams<S>& p,
                                const std::vector<int>& question_ids,
                                const std::vector<int>& context_ids,
                                const std::string& example_id) {
  std::vector<int> seq;
  seq.reserve(question_ids.size() + context_ids.size() + 3);
  seq.push_back(PieceVocab::kCls);
  seq.insert(seq.end(), question_ids.begin(), question_ids.end());
  seq.push_back(PieceVocab::kSep);
  const Eigen::Index ctx_begin = static_cast<Eigen::Index>(seq.size());
  seq.insert(seq.end(), context_ids.begin(), context_ids.end());
  seq.push_back(PieceVocab::kSep);
  const Eigen::Index T = static_cast<Eigen::Index>(seq.size());
  if (T > p.max_positions)
    throw std::invalid_argument("example " + example_id + ": encoded length " +
                                std::to_string(T) + " exceeds max_positions " +
                                std::to_string(p.max_positions));
  std::vector<int> pos(seq.size());
  for (std::size_t t = 0; t < pos.size(); ++t) pos[t] = static_cast<int>(t);
  Expr<S> x = add(embed(g.param(*p.tok_emb), seq), embed(g.param(*p.pos_emb), pos));
  for (const auto& lp : p.layers) {
    Expr<S> a = layer_norm(x, g.param(*lp.ln1_gamma), g.param(*lp.ln1_beta));
    x = add(x, detail::self_attention(g, lp, a, p.heads));
    Expr<S> f = layer_norm(x, g.param(*lp.ln2_gamma), g.param(*lp.ln2_beta));
    Expr<S> hidden = gelu(add_cols(matmul(g.param(*lp.ff1_w), f), g.param(*lp.ff1_b)));
    Expr<S> ff = add_cols(matmul(g.param(*lp.ff2_w), hidden), g.param(*lp.ff2_b));
    x = add(x, ff);
  }
  EncoderOutput<S> out;
  out.context = slice_cols(x, ctx_begin, static_cast<Eigen::Index>(context_ids.size()));
  out.cls = slice_cols(x, 0, 1);
  return out;
}

}  // namespace jointqa
