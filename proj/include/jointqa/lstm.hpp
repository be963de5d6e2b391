#pragma once

#include <optional>
#include <string>
#include <type_traits>
#include <vector>

#include "jointqa/graph.hpp"

namespace jointqa {

/// Gate layout inside w and b: rows [0,H) input gate, [H,2H) forget gate,
/// [2H,3H) candidate, [3H,4H) output gate. w is [4H x (I+H)], b is [4H x 1].
template <typename S>
struct LstmParams {
  Parameter<S>* w = nullptr;
  Parameter<S>* b = nullptr;
  int input = 0;
  int hidden = 0;
};

template <typename S>
LstmParams<S> make_lstm(ParameterStore<S>& ps, const std::string& prefix, int input,
                        int hidden) {
  LstmParams<S> p;
  p.w = &ps.create(prefix + ".w", 4 * hidden, input + hidden);
  p.b = &ps.create(prefix + ".b", 4 * hidden, 1);
  p.input = input;
  p.hidden = hidden;
  return p;
}

/// Runs one direction over the columns of x [I x L], returning hidden states
/// [H x L] in source order (column t is the state after reading position t,
/// regardless of direction). h0/c0 default to zeros.
template <typename S>
Expr<S> lstm_run(Graph<S>& g, const LstmParams<S>& p, Expr<S> x,
                 std::optional<Expr<std::type_identity_t<S>>> h0 = {},
                 std::optional<Expr<std::type_identity_t<S>>> c0 = {},
                 bool reverse = false) {
  const int H = p.hidden;
  detail::gcheck(x.rows() == p.input, "lstm_run: input row count");
  const Eigen::Index L = x.cols();
  detail::gcheck(L >= 1, "lstm_run: empty sequence");
  Expr<S> h = h0 ? *h0 : g.zeros(H, 1);
  Expr<S> c = c0 ? *c0 : g.zeros(H, 1);
  detail::gcheck(h.rows() == H && h.cols() == 1, "lstm_run: h0 shape");
  detail::gcheck(c.rows() == H && c.cols() == 1, "lstm_run: c0 shape");
  Expr<S> w = g.param(*p.w);
  Expr<S> b = g.param(*p.b);
  std::vector<Expr<S>> states(static_cast<std::size_t>(L));
  for (Eigen::Index step = 0; step < L; ++step) {
    Eigen::Index t = reverse ? L - 1 - step : step;
    Expr<S> xt = slice_cols(x, t, 1);
    Expr<S> z = add(matmul(w, vcat<S>({xt, h})), b);
    Expr<S> i = sigmoid(slice_rows(z, 0, H));
    Expr<S> f = sigmoid(slice_rows(z, H, H));
    Expr<S> cand = tanh_(slice_rows(z, 2 * H, H));
    Expr<S> o = sigmoid(slice_rows(z, 3 * H, H));
    c = add(cmul(f, c), cmul(i, cand));
    h = cmul(o, tanh_(c));
    states[static_cast<std::size_t>(t)] = h;
  }
  return hcat<S>(std::move(states));
}

template <typename S>
struct BiLstmParams {
  LstmParams<S> fwd;
  LstmParams<S> bwd;
  int hidden = 0;  // per direction
};

template <typename S>
BiLstmParams<S> make_bilstm(ParameterStore<S>& ps, const std::string& prefix, int input,
                            int hidden) {
  BiLstmParams<S> p;
  p.fwd = make_lstm(ps, prefix + ".fwd", input, hidden);
  p.bwd = make_lstm(ps, prefix + ".bwd", input, hidden);
  p.hidden = hidden;
  return p;
}

/// Both directions over x [I x L], stacked [2H x L] (forward on top). A
/// provided (h0, c0) initializes both directions identically.
template <typename S>
Expr<S> bilstm_run(Graph<S>& g, const BiLstmParams<S>& p, Expr<S> x,
                   std::optional<Expr<std::type_identity_t<S>>> h0 = {},
                   std::optional<Expr<std::type_identity_t<S>>> c0 = {}) {
  Expr<S> f = lstm_run(g, p.fwd, x, h0, c0, /*reverse=*/false);
  Expr<S> b = lstm_run(g, p.bwd, x, h0, c0, /*reverse=*/true);
  return vcat<S>({f, b});
}

}  // namespace jointqa
