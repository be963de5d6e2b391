#include <doctest.h>

#include <random>
#include <vector>

#include "jointqa/char_cnn.hpp"
#include "jointqa/config.hpp"
#include "jointqa/encoder.hpp"
#include "jointqa/gradcheck.hpp"
#include "jointqa/graph.hpp"

using namespace jointqa;

namespace {

Mat<double> rnd(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Mat<double> m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = d(rng);
  return m;
}

void randomize(ParameterStore<double>& ps, std::uint64_t seed) {
  std::uint64_t k = 0;
  for (auto& p : ps) p->value = 0.3 * rnd(p->value.rows(), p->value.cols(), seed + 31 * ++k);
}

template <typename Build>
void check_grads(ParameterStore<double>& ps, Build&& build, double tol = 1e-6,
                 double eps = 1e-6) {
  auto forward = [&]() -> double {
    Graph<double> g;
    return build(g).value()(0, 0);
  };
  ps.zero_grads();
  {
    Graph<double> g;
    g.backward(build(g));
  }
  GradCheckOptions opt;
  opt.eps = eps;
  opt.tol = tol;
  GradCheckReport rep = fd_compare(ps, forward, opt);
  CHECK(rep.checked > 0);
  CHECK_MESSAGE(rep.failures.empty(),
                "worst: ", rep.worst.param, "(", rep.worst.row, ",", rep.worst.col,
                ") analytic=", rep.worst.analytic, " numeric=", rep.worst.numeric,
                " rel=", rep.worst.rel_err);
}

Piece piece_with_chars(std::vector<int> ids, std::size_t slots) {
  Piece p;
  p.char_ids = std::move(ids);
  p.char_ids.resize(slots, CharVocab::kPad);
  return p;
}

ModelConfig tiny_encoder_config() {
  ModelConfig cfg;
  cfg.d_bert = 6;
  cfg.encoder_heads = 2;
  cfg.encoder_layers = 1;
  cfg.max_positions = 16;
  return cfg;
}

}  // namespace

TEST_SUITE("embeddings") {

TEST_CASE("char cnn shape and per-piece locality") {
  ModelConfig cfg;
  cfg.d_char_emb = 3;
  cfg.char_embed_dim = 2;
  cfg.char_cnn_kernel = 3;
  ParameterStore<double> ps;
  auto p = make_char_cnn(ps, cfg, /*char_vocab_size=*/7);
  randomize(ps, 11);
  std::vector<Piece> pieces = {piece_with_chars({2, 3, 4}, 6), piece_with_chars({5, 6}, 6),
                               piece_with_chars({2, 3, 4}, 6)};
  Graph<double> g;
  Expr<double> out = char_cnn_encode(g, p, pieces);
  CHECK(out.rows() == 3);
  CHECK(out.cols() == 3);
  // identical char content -> identical column, independent of neighbors
  CHECK((out.value().col(0) - out.value().col(2)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((out.value().col(0) - out.value().col(1)).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("char cnn pools only the real character prefix") {
  ModelConfig cfg;
  cfg.d_char_emb = 2;
  cfg.char_embed_dim = 2;
  cfg.char_cnn_kernel = 1;  // kernel 1 keeps positions independent
  ParameterStore<double> ps;
  auto p = make_char_cnn(ps, cfg, 9);
  randomize(ps, 22);
  // slots after the first pad are ignored even if they hold live ids
  std::vector<Piece> a = {piece_with_chars({2, 3, 0, 8}, 4)};
  std::vector<Piece> b = {piece_with_chars({2, 3, 0, 0}, 4)};
  Graph<double> g;
  Mat<double> va = char_cnn_encode(g, p, a).value();
  Mat<double> vb = char_cnn_encode(g, p, b).value();
  CHECK((va - vb).cwiseAbs().maxCoeff() == 0.0);
  // but a live id inside the prefix does change the pooled vector
  std::vector<Piece> c = {piece_with_chars({2, 8, 0, 0}, 4)};
  Mat<double> vc = char_cnn_encode(g, p, c).value();
  CHECK((va - vc).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("char cnn handles the all-pad structural piece") {
  ModelConfig cfg;
  cfg.d_char_emb = 2;
  cfg.char_embed_dim = 2;
  cfg.char_cnn_kernel = 3;
  ParameterStore<double> ps;
  auto p = make_char_cnn(ps, cfg, 5);
  randomize(ps, 33);
  std::vector<Piece> pieces = {piece_with_chars({}, 4)};
  Graph<double> g;
  Mat<double> v = char_cnn_encode(g, p, pieces).value();
  CHECK(v.allFinite());
  CHECK(v.rows() == 2);
  CHECK(v.cols() == 1);
}

TEST_CASE("char cnn kernel-1 matches a per-position linear map oracle") {
  ModelConfig cfg;
  cfg.d_char_emb = 3;
  cfg.char_embed_dim = 2;
  cfg.char_cnn_kernel = 1;
  ParameterStore<double> ps;
  auto p = make_char_cnn(ps, cfg, 6);
  randomize(ps, 44);
  std::vector<Piece> pieces = {piece_with_chars({2, 4, 5}, 5)};
  Graph<double> g;
  Mat<double> got = char_cnn_encode(g, p, pieces).value();
  // oracle: max over real chars of (conv_w * emb[:, id] + conv_b)
  Mat<double> best = Mat<double>::Constant(3, 1, -1e300);
  for (int id : {2, 4, 5}) {
    Mat<double> col = p.conv_w->value * p.char_emb->value.col(id) + p.conv_b->value;
    best = best.cwiseMax(col);
  }
  CHECK((got - best).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("char cnn gradients match finite differences") {
  ModelConfig cfg;
  cfg.d_char_emb = 2;
  cfg.char_embed_dim = 2;
  cfg.char_cnn_kernel = 3;
  ParameterStore<double> ps;
  auto p = make_char_cnn(ps, cfg, 6);
  randomize(ps, 55);
  std::vector<Piece> pieces = {piece_with_chars({2, 3, 4, 5}, 4), piece_with_chars({3, 3}, 4)};
  check_grads(ps, [&](Graph<double>& g) {
    Expr<double> out = char_cnn_encode(g, p, pieces);
    return sum_all(cmul(out, g.constant(rnd(out.rows(), out.cols(), 56))));
  });
}

TEST_CASE("zero-initialized encoder passes token plus position through") {
  ModelConfig cfg = tiny_encoder_config();
  ParameterStore<double> ps;
  auto p = make_encoder(ps, cfg, /*piece_vocab_size=*/10);
  // layer weights stay zero; only the embedding tables carry signal
  p.tok_emb->value = rnd(cfg.d_bert, 10, 66);
  p.pos_emb->value = rnd(cfg.d_bert, cfg.max_positions, 67);
  std::vector<int> q = {4, 5};
  std::vector<int> c = {6, 7, 8};
  Graph<double> g;
  auto out = encoder_encode(g, p, q, c, "zero-init");
  REQUIRE(out.context.cols() == 3);
  REQUIRE(out.context.rows() == cfg.d_bert);
  // sequence is [CLS] 4 5 [SEP] 6 7 8 [SEP]; context occupies positions 4..6
  for (int t = 0; t < 3; ++t) {
    Mat<double> expect = p.tok_emb->value.col(c[static_cast<std::size_t>(t)]) +
                         p.pos_emb->value.col(4 + t);
    CHECK((out.context.value().col(t) - expect).cwiseAbs().maxCoeff() < 1e-15);
  }
  Mat<double> cls_expect = p.tok_emb->value.col(PieceVocab::kCls) + p.pos_emb->value.col(0);
  CHECK((out.cls.value() - cls_expect).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("encoder rejects sequences beyond max_positions naming the example") {
  ModelConfig cfg = tiny_encoder_config();
  cfg.max_positions = 8;
  ParameterStore<double> ps;
  auto p = make_encoder(ps, cfg, 10);
  std::vector<int> q = {4, 5, 6};
  std::vector<int> c = {6, 7, 8, 9};  // 3 + 3 + 4 = 10 > 8 with specials
  Graph<double> g;
  CHECK_THROWS_WITH_AS(encoder_encode(g, p, q, c, "too-long-example"),
                       doctest::Contains("too-long-example"), std::invalid_argument);
}

TEST_CASE("encoder output reacts to question content and position") {
  ModelConfig cfg = tiny_encoder_config();
  ParameterStore<double> ps;
  auto p = make_encoder(ps, cfg, 12);
  randomize(ps, 77);
  std::vector<int> c = {6, 7};
  Graph<double> g;
  Mat<double> with_q1 = encoder_encode(g, p, {4}, c, "a").context.value();
  Mat<double> with_q2 = encoder_encode(g, p, {5}, c, "b").context.value();
  // self attention mixes the question into the context representation
  CHECK((with_q1 - with_q2).cwiseAbs().maxCoeff() > 1e-8);
  Mat<double> swapped = encoder_encode(g, p, {4}, {7, 6}, "c").context.value();
  // position embeddings break permutation symmetry
  CHECK((with_q1.col(0) - swapped.col(1)).cwiseAbs().maxCoeff() > 1e-8);
}

TEST_CASE("encoder gradients match finite differences") {
  ModelConfig cfg;
  cfg.d_bert = 4;
  cfg.encoder_heads = 2;
  cfg.encoder_layers = 2;
  cfg.max_positions = 8;
  ParameterStore<double> ps;
  auto p = make_encoder(ps, cfg, 9);
  randomize(ps, 88);
  std::vector<int> q = {4};
  std::vector<int> c = {5, 6};
  check_grads(
      ps,
      [&](Graph<double>& g) {
        auto out = encoder_encode(g, p, q, c, "gc");
        Expr<double> s1 = sum_all(cmul(out.context, g.constant(rnd(4, 2, 89))));
        Expr<double> s2 = sum_all(cmul(out.cls, g.constant(rnd(4, 1, 90))));
        return add(s1, s2);
      },
      5e-6, 1e-6);
}

}  // TEST_SUITE
