#pragma once

#include <string>
#include <vector>

#include "jointqa/config.hpp"
#include "jointqa/graph.hpp"
#include "jointqa/tokenizer.hpp"
#include "jointqa/vocab.hpp"

namespace jointqa {

template <typename S>
struct CharCnnParams {
  Parameter<S>* char_emb = nullptr;  // [char_embed_dim x |chars|]
  Parameter<S>* conv_w = nullptr;    // [d_char_emb x char_embed_dim*kernel]
  Parameter<S>* conv_b = nullptr;    // [d_char_emb x 1]
  int kernel = 0;
};

template <typename S>
CharCnnParams<S> make_char_cnn(ParameterStore<S>& ps, const ModelConfig& cfg,
                               Eigen::Index char_vocab_size) {
  CharCnnParams<S> p;
  p.char_emb = &ps.create("char_cnn.char_emb", cfg.char_embed_dim, char_vocab_size);
  p.conv_w =
      &ps.create("char_cnn.conv_w", cfg.d_char_emb, cfg.char_embed_dim * cfg.char_cnn_kernel);
  p.conv_b = &ps.create("char_cnn.conv_b", cfg.d_char_emb, 1);
  p.kernel = cfg.char_cnn_kernel;
  return p;
}

/// Character-level piece vectors: embed each piece's characters, convolve
/// over character positions, max-pool over the piece's real characters.
/// Returns [d_char_emb x L] for L pieces.
template <typename S>
Expr<S> char_cnn_encode(Graph<S>& g, const CharCnnParams<S>& p,
                        const std::vector<Piece>& pieces) {
  detail::gcheck(!pieces.empty(), "char_cnn_encode: no pieces");
  Expr<S> table = g.param(*p.char_emb);
  Expr<S> w = g.param(*p.conv_w);
  Expr<S> b = g.param(*p.conv_b);
  std::vector<Expr<S>> cols;
  cols.reserve(pieces.size());
  for (const Piece& piece : pieces) {
    detail::gcheck(!piece.char_ids.empty(), "char_cnn_encode: piece without char slots");
    Expr<S> emb = embed(table, piece.char_ids);
    Expr<S> conv = conv1d_same(emb, w, b, p.kernel);
    std::size_t real = 0;
    while (real < piece.char_ids.size() && piece.char_ids[real] != CharVocab::kPad) ++real;
    Mask mask(piece.char_ids.size(), 0);
    if (real == 0) real = piece.char_ids.size();  // structural piece: pool everything
    for (std::size_t k = 0; k < real; ++k) mask[k] = 1;
    cols.push_back(rowwise_max(conv, mask));
  }
  return hcat<S>(std::move(cols));
}

}  // namespace jointqa
