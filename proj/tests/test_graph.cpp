#include <doctest.h>

#include <cmath>
#include <random>

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

// Differentiates build's scalar output through every parameter in ps and
// compares against central finite differences.
template <typename Build>
void check_grads(ParameterStore<double>& ps, Build&& build, double tol = 1e-7,
                 double eps = 1e-6) {
  auto forward = [&]() -> double {
    Graph<double> g;
    Expr<double> loss = build(g);
    return loss.value()(0, 0);
  };
  ps.zero_grads();
  {
    Graph<double> g;
    Expr<double> loss = build(g);
    g.backward(loss);
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

// Weighted sum makes the loss sensitive to every output entry separately.
Expr<double> weighted_sum(Graph<double>& g, Expr<double> x, std::uint64_t seed) {
  return sum_all(cmul(x, g.constant(rnd(x.rows(), x.cols(), seed))));
}

}  // namespace

TEST_SUITE("graph") {

TEST_CASE("matmul matches the direct product and backpropagates") {
  ParameterStore<double> ps;
  auto& a = ps.create("a", 3, 4);
  auto& b = ps.create("b", 4, 5);
  a.value = rnd(3, 4, 1);
  b.value = rnd(4, 5, 2);
  {
    Graph<double> g;
    auto y = matmul(g.param(a), g.param(b));
    Mat<double> expect = a.value * b.value;
    CHECK((y.value() - expect).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  }
  check_grads(ps, [&](Graph<double>& g) {
    return weighted_sum(g, matmul(g.param(a), g.param(b)), 3);
  });
}

TEST_CASE("elementwise add, sub, cmul and scale") {
  ParameterStore<double> ps;
  auto& a = ps.create("a", 4, 3);
  auto& b = ps.create("b", 4, 3);
  a.value = rnd(4, 3, 4);
  b.value = rnd(4, 3, 5);
  {
    Graph<double> g;
    auto ea = g.param(a), eb = g.param(b);
    CHECK(add(ea, eb).value()(1, 2) == doctest::Approx(a.value(1, 2) + b.value(1, 2)));
    CHECK(sub(ea, eb).value()(2, 0) == doctest::Approx(a.value(2, 0) - b.value(2, 0)));
    CHECK(cmul(ea, eb).value()(0, 1) == doctest::Approx(a.value(0, 1) * b.value(0, 1)));
    CHECK(scale(ea, 2.5).value()(3, 2) == doctest::Approx(2.5 * a.value(3, 2)));
  }
  check_grads(ps, [&](Graph<double>& g) {
    auto ea = g.param(a), eb = g.param(b);
    auto y = add(cmul(ea, eb), scale(sub(ea, eb), 0.75));
    return weighted_sum(g, y, 6);
  });
}

TEST_CASE("add_cols broadcasts a column bias") {
  ParameterStore<double> ps;
  auto& m = ps.create("m", 3, 5);
  auto& bias = ps.create("bias", 3, 1);
  m.value = rnd(3, 5, 7);
  bias.value = rnd(3, 1, 8);
  {
    Graph<double> g;
    auto y = add_cols(g.param(m), g.param(bias));
    for (int c = 0; c < 5; ++c)
      CHECK(y.value()(1, c) == doctest::Approx(m.value(1, c) + bias.value(1, 0)));
  }
  check_grads(ps, [&](Graph<double>& g) {
    return weighted_sum(g, add_cols(g.param(m), g.param(bias)), 9);
  });
}

TEST_CASE("transpose, concatenation and slicing round-trip") {
  ParameterStore<double> ps;
  auto& a = ps.create("a", 2, 3);
  auto& b = ps.create("b", 3, 2);
  a.value = rnd(2, 3, 10);
  b.value = rnd(3, 2, 11);
  {
    Graph<double> g;
    auto ea = g.param(a), eb = g.param(b);
    auto v = vcat<double>({ea, transpose(eb)});
    CHECK(v.rows() == 4);
    CHECK((slice_rows(v, 0, 2).value() - a.value).cwiseAbs().maxCoeff() ==
          doctest::Approx(0.0));
    CHECK((slice_rows(v, 2, 2).value() - b.value.transpose()).cwiseAbs().maxCoeff() ==
          doctest::Approx(0.0));
    auto h = hcat<double>({ea, transpose(eb)});
    CHECK(h.cols() == 3 + 3);
    CHECK((slice_cols(h, 3, 3).value() - b.value.transpose()).cwiseAbs().maxCoeff() ==
          doctest::Approx(0.0));
  }
  check_grads(ps, [&](Graph<double>& g) {
    auto ea = g.param(a), eb = g.param(b);
    auto v = vcat<double>({ea, transpose(eb)});
    auto h = hcat<double>({ea, transpose(eb)});
    auto y = add(slice_rows(v, 1, 2), slice_cols(h, 2, 3));
    return weighted_sum(g, y, 12);
  });
}

TEST_CASE("pointwise nonlinearities have the expected values") {
  ParameterStore<double> ps;
  auto& x = ps.create("x", 1, 5);
  x.value.resize(1, 5);
  x.value << -3.0, -1.0, 0.0, 1.0, 3.0;
  {
    Graph<double> g;
    auto ex = g.param(x);
    CHECK(sigmoid(ex).value()(0, 2) == doctest::Approx(0.5));
    CHECK(tanh_(ex).value()(0, 2) == doctest::Approx(0.0));
    CHECK(tanh_(ex).value()(0, 3) == doctest::Approx(std::tanh(1.0)));
    auto gv = gelu(ex).value();
    CHECK(gv(0, 2) == doctest::Approx(0.0));
    CHECK(gv(0, 3) == doctest::Approx(0.8413447460685429));  // x * Phi(x) at 1
    CHECK(gv(0, 4) == doctest::Approx(2.9959503059051).epsilon(1e-9));  // 3 * Phi(3)
    CHECK(gv(0, 0) == doctest::Approx(-0.0040496940948867).epsilon(1e-6));
  }
  check_grads(ps, [&](Graph<double>& g) {
    auto ex = g.param(x);
    auto y = add(gelu(ex), add(sigmoid(ex), tanh_(ex)));
    return weighted_sum(g, y, 13);
  });
}

TEST_CASE("log_floor clamps tiny values and zeroes their gradient") {
  ParameterStore<double> ps;
  auto& x = ps.create("x", 1, 2);
  x.value.resize(1, 2);
  x.value << 2.0, 1e-40;
  Graph<double> g;
  auto y = log_floor(g.param(x), 1e-30);
  CHECK(y.value()(0, 0) == doctest::Approx(std::log(2.0)));
  CHECK(y.value()(0, 1) == doctest::Approx(std::log(1e-30)));
  g.backward(sum_all(y));
  CHECK(x.grad(0, 0) == doctest::Approx(0.5));
  CHECK(x.grad(0, 1) == doctest::Approx(0.0));

  ParameterStore<double> safe;
  auto& z = safe.create("z", 1, 3);
  z.value.resize(1, 3);
  z.value << 0.3, 1.7, 0.09;
  check_grads(safe, [&](Graph<double>& gg) {
    return weighted_sum(gg, log_floor(gg.param(z), 1e-30), 14);
  });
}

TEST_CASE("masked softmax_rows zeroes padded columns and renormalizes") {
  ParameterStore<double> ps;
  auto& x = ps.create("x", 3, 5);
  x.value = rnd(3, 5, 15);
  Mask mask{1, 1, 1, 0, 0};
  {
    Graph<double> g;
    auto y = softmax_rows(g.param(x), mask);
    for (int r = 0; r < 3; ++r) {
      CHECK(y.value()(r, 3) == 0.0);  // exactly zero on padding
      CHECK(y.value()(r, 4) == 0.0);
      double s = y.value().row(r).head(3).sum();
      CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
      // agrees with an unmasked softmax over the real prefix
      double denom = 0.0;
      for (int c = 0; c < 3; ++c) denom += std::exp(x.value(r, c) - x.value.row(r).head(3).maxCoeff());
      double num = std::exp(x.value(r, 1) - x.value.row(r).head(3).maxCoeff());
      CHECK(y.value()(r, 1) == doctest::Approx(num / denom).epsilon(1e-12));
    }
  }
  check_grads(ps, [&](Graph<double>& g) {
    return weighted_sum(g, softmax_rows(g.param(x), mask), 16);
  });

  Graph<double> g2;
  auto e = g2.constant(rnd(2, 3, 17));
  CHECK_THROWS_AS(softmax_rows(e, Mask{0, 0, 0}), std::invalid_argument);
}

TEST_CASE("rowwise_max reduces over real columns and routes gradient to the first argmax") {
  ParameterStore<double> ps;
  auto& x = ps.create("x", 2, 4);
  x.value.resize(2, 4);
  x.value << 0.1, 0.9, 0.9, 5.0,
             0.7, 0.2, 0.4, 5.0;
  Mask mask{1, 1, 1, 0};
  Graph<double> g;
  auto y = rowwise_max(g.param(x), mask);
  CHECK(y.rows() == 2);
  CHECK(y.cols() == 1);
  CHECK(y.value()(0, 0) == doctest::Approx(0.9));  // padded 5.0 ignored
  CHECK(y.value()(1, 0) == doctest::Approx(0.7));
  g.backward(sum_all(y));
  CHECK(x.grad(0, 1) == doctest::Approx(1.0));  // first of the two ties
  CHECK(x.grad(0, 2) == doctest::Approx(0.0));
  CHECK(x.grad(0, 3) == doctest::Approx(0.0));
  CHECK(x.grad(1, 0) == doctest::Approx(1.0));

  ParameterStore<double> safe;
  auto& z = safe.create("z", 3, 4);
  z.value = rnd(3, 4, 18);  // distinct entries, FD is valid
  check_grads(safe, [&](Graph<double>& gg) {
    return weighted_sum(gg, rowwise_max(gg.param(z), Mask{1, 1, 1, 1}), 19);
  });
}

TEST_CASE("sum_all and pick") {
  ParameterStore<double> ps;
  auto& x = ps.create("x", 3, 3);
  x.value = rnd(3, 3, 20);
  {
    Graph<double> g;
    auto ex = g.param(x);
    CHECK(sum_all(ex).value()(0, 0) == doctest::Approx(x.value.sum()));
    CHECK(pick(ex, 2, 1).value()(0, 0) == doctest::Approx(x.value(2, 1)));
    CHECK_THROWS_AS(pick(ex, 3, 0), std::invalid_argument);
  }
  check_grads(ps, [&](Graph<double>& g) {
    auto ex = g.param(x);
    return add(sum_all(ex), pick(ex, 0, 2));
  });
}

TEST_CASE("embed gathers columns and accumulates duplicate ids") {
  ParameterStore<double> ps;
  auto& table = ps.create("table", 3, 6);
  table.value = rnd(3, 6, 21);
  std::vector<int> ids{1, 4, 1};
  {
    Graph<double> g;
    auto y = embed(g.param(table), ids);
    CHECK((y.value().col(0) - table.value.col(1)).cwiseAbs().maxCoeff() ==
          doctest::Approx(0.0));
    CHECK((y.value().col(1) - table.value.col(4)).cwiseAbs().maxCoeff() ==
          doctest::Approx(0.0));
    CHECK((y.value().col(2) - table.value.col(1)).cwiseAbs().maxCoeff() ==
          doctest::Approx(0.0));
    CHECK_THROWS_AS(embed(g.param(table), std::vector<int>{6}), std::invalid_argument);
  }
  Mat<double> w = rnd(3, 3, 22);
  ps.zero_grads();
  {
    Graph<double> g;
    auto y = embed(g.param(table), ids);
    g.backward(sum_all(cmul(y, g.constant(w))));
  }
  CHECK((table.grad.col(1) - (w.col(0) + w.col(2))).cwiseAbs().maxCoeff() ==
        doctest::Approx(0.0));
  CHECK(table.grad.col(0).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  check_grads(ps, [&](Graph<double>& g) {
    return weighted_sum(g, embed(g.param(table), ids), 23);
  });
}

TEST_CASE("conv1d_same matches a naive loop oracle") {
  const int C = 3, L = 7, F = 4, K = 5;
  ParameterStore<double> ps;
  auto& x = ps.create("x", C, L);
  auto& w = ps.create("w", F, C * K);
  auto& b = ps.create("b", F, 1);
  x.value = rnd(C, L, 24);
  w.value = rnd(F, C * K, 25);
  b.value = rnd(F, 1, 26);
  Mat<double> expect = Mat<double>::Zero(F, L);
  for (int t = 0; t < L; ++t) {
    for (int f = 0; f < F; ++f) {
      double acc = b.value(f, 0);
      for (int k = 0; k < K; ++k) {
        int src = t + k - K / 2;
        if (src < 0 || src >= L) continue;
        for (int c = 0; c < C; ++c) acc += w.value(f, k * C + c) * x.value(c, src);
      }
      expect(f, t) = acc;
    }
  }
  {
    Graph<double> g;
    auto y = conv1d_same(g.param(x), g.param(w), g.param(b), K);
    CHECK((y.value() - expect).cwiseAbs().maxCoeff() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK_THROWS_AS(conv1d_same(g.param(x), g.param(w), g.param(b), 4),
                    std::invalid_argument);
  }
  check_grads(ps, [&](Graph<double>& g) {
    return weighted_sum(g, conv1d_same(g.param(x), g.param(w), g.param(b), K), 27);
  });
}

TEST_CASE("layer_norm standardizes each column before the affine") {
  const int D = 5, L = 4;
  ParameterStore<double> ps;
  auto& x = ps.create("x", D, L);
  auto& gamma = ps.create("gamma", D, 1);
  auto& beta = ps.create("beta", D, 1);
  x.value = rnd(D, L, 28);
  gamma.value.setOnes(D, 1);
  beta.value.setZero(D, 1);
  {
    Graph<double> g;
    auto y = layer_norm(g.param(x), g.param(gamma), g.param(beta), 1e-9);
    for (int c = 0; c < L; ++c) {
      CHECK(y.value().col(c).mean() == doctest::Approx(0.0).epsilon(1e-9));
      double var = (y.value().col(c).array() - y.value().col(c).mean()).square().mean();
      CHECK(var == doctest::Approx(1.0).epsilon(1e-6));
    }
  }
  gamma.value = rnd(D, 1, 29);
  beta.value = rnd(D, 1, 30);
  check_grads(ps, [&](Graph<double>& g) {
    auto y = layer_norm(g.param(x), g.param(gamma), g.param(beta), 1e-5);
    return weighted_sum(g, y, 31);
  }, 1e-6);
}

TEST_CASE("dropout_mask applies the externally drawn keep matrix") {
  ParameterStore<double> ps;
  auto& x = ps.create("x", 3, 4);
  x.value = rnd(3, 4, 32);
  Mat<double> keep = Mat<double>::Zero(3, 4);
  keep(0, 0) = 2.0;  // 1/(1-p) scaling for p = 0.5
  keep(1, 2) = 2.0;
  keep(2, 3) = 2.0;
  {
    Graph<double> g;
    auto y = dropout_mask(g.param(x), keep);
    CHECK(y.value()(0, 0) == doctest::Approx(2.0 * x.value(0, 0)));
    CHECK(y.value()(0, 1) == doctest::Approx(0.0));
  }
  check_grads(ps, [&](Graph<double>& g) {
    return weighted_sum(g, dropout_mask(g.param(x), keep), 33);
  });
}

TEST_CASE("shape mismatches and invalid losses are rejected") {
  Graph<double> g;
  auto a = g.constant(rnd(2, 3, 34));
  auto b = g.constant(rnd(3, 2, 35));
  CHECK_THROWS_AS(add(a, b), std::invalid_argument);
  CHECK_THROWS_AS(cmul(a, b), std::invalid_argument);
  CHECK_THROWS_AS(matmul(a, a), std::invalid_argument);
  CHECK_THROWS_AS(vcat<double>({a, b}), std::invalid_argument);
  CHECK_THROWS_AS(hcat<double>({a, b}), std::invalid_argument);
  CHECK_THROWS_AS(slice_rows(a, 1, 5), std::invalid_argument);
  CHECK_THROWS_AS(softmax_rows(a, Mask{1, 1}), std::invalid_argument);
  CHECK_THROWS_AS(g.backward(a), std::invalid_argument);  // non-scalar loss
}

TEST_CASE("parameter store enforces unique names") {
  ParameterStore<float> ps;
  ps.create("w", 2, 2);
  CHECK_THROWS_AS(ps.create("w", 2, 2), std::invalid_argument);
  CHECK_THROWS_AS(ps.at("missing"), std::out_of_range);
  CHECK(ps.scalar_count() == 4);
}

TEST_CASE("gradient check demands a nonzero step") {
  ParameterStore<double> ps;
  ps.create("w", 1, 1);
  GradCheckOptions opt;
  opt.eps = 0.0;
  CHECK_THROWS_AS(fd_compare(ps, [] { return 0.0; }, opt), std::invalid_argument);
}

}  // TEST_SUITE
