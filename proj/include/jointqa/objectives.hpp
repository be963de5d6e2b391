#pragma once

#include <Eigen/Core>
#include <cmath>
#include <vector>

#include "jointqa/features.hpp"
#include "jointqa/graph.hpp"
#include "jointqa/posterior.hpp"

namespace jointqa {

/// Target distribution for the no-answer regime: uniform mass 2/((L-1)L) on
/// every lower-triangular cell (i > j) of an L x L start-by-end grid, zero
/// elsewhere. Requires L >= 2.
Eigen::MatrixXd partial_uniform(Eigen::Index L);

/// Negative log joint at the gold configuration. The answerable branch scores
/// -log P(A=1) - log p1[start] - log p2[end]. The no-answer branch scores
/// -log P(A=0) plus the negative log joint at the model's best lower-region
/// witness; single_answer_term drops the second P(A=0) factor that witness
/// contributes. Logs are floored at kProbFloor.
double loss1(const PosteriorValues& pv, const GoldLabel& gold, bool single_answer_term = false);

/// KL(partial-uniform target || factorized span posterior) computed by the
/// literal double loop over the lower region. Requires L >= 2.
double lower_region_kl(const PosteriorValues& pv);

/// Same answerable branch as loss1; the no-answer branch scores
/// -log P(A=0) + lower_region_kl.
double loss2(const PosteriorValues& pv, const GoldLabel& gold);

/// Mean of per-example losses; an empty batch is an error.
double batch_loss(const std::vector<double>& per_example);

namespace detail {

template <typename S>
PosteriorValues snapshot(Expr<S> p_answer, Expr<S> p_start, Expr<S> p_end) {
  PosteriorValues pv;
  pv.answer = {static_cast<double>(p_answer.value()(0, 0)),
               static_cast<double>(p_answer.value()(1, 0))};
  const Eigen::Index L = p_start.cols();
  pv.start.resize(static_cast<std::size_t>(L));
  pv.end.resize(static_cast<std::size_t>(L));
  for (Eigen::Index k = 0; k < L; ++k) {
    pv.start[static_cast<std::size_t>(k)] = static_cast<double>(p_start.value()(0, k));
    pv.end[static_cast<std::size_t>(k)] = static_cast<double>(p_end.value()(0, k));
  }
  return pv;
}

template <typename S>
Expr<S> nlog(Expr<S> prob_entry) {
  return scale(log_floor(prob_entry, static_cast<S>(kProbFloor)), S(-1));
}

}  // namespace detail

/// Differentiable counterpart of loss1 over model outputs. p_answer is
/// [2 x 1], p_start/p_end are [1 x L] at the real context length. The
/// no-answer branch treats the lower-region witness indices as constants of
/// the current iterate.
template <typename S>
Expr<S> loss1_graph(Graph<S>& /*g*/, Expr<S> p_answer, Expr<S> p_start, Expr<S> p_end,
                    const GoldLabel& gold, bool single_answer_term = false) {
  if (gold.answerable == 1) {
    Expr<S> t = add(detail::nlog(pick(p_answer, 1, 0)),
                    add(detail::nlog(pick(p_start, 0, gold.start)),
                        detail::nlog(pick(p_end, 0, gold.end))));
    return t;
  }
  PosteriorValues pv = detail::snapshot(p_answer, p_start, p_end);
  SpanScore low = constrained_max(pv.answer[0], pv.start, pv.end, /*upper=*/false);
  if (!low.has_witness)
    throw std::invalid_argument("no-answer loss needs L >= 2 context positions");
  Expr<S> witness = add(detail::nlog(pick(p_start, 0, low.i)),
                        detail::nlog(pick(p_end, 0, low.j)));
  if (!single_answer_term) witness = add(witness, detail::nlog(pick(p_answer, 0, 0)));
  return add(detail::nlog(pick(p_answer, 0, 0)), witness);
}

/// Differentiable counterpart of loss2. The no-answer branch uses the closed
/// form of the lower-region KL: with u = 2/((L-1)L),
///   KL = log u - u * (sum_i i*log p1[i] + sum_j (L-1-j)*log p2[j]).
template <typename S>
Expr<S> loss2_graph(Graph<S>& g, Expr<S> p_answer, Expr<S> p_start, Expr<S> p_end,
                    const GoldLabel& gold) {
  if (gold.answerable == 1)
    return loss1_graph(g, p_answer, p_start, p_end, gold, /*single_answer_term=*/false);
  const Eigen::Index L = p_start.cols();
  if (L < 2) throw std::invalid_argument("partial uniform target needs L >= 2");
  const double u = 2.0 / (static_cast<double>(L - 1) * static_cast<double>(L));
  Mat<S> start_coef(1, L), end_coef(1, L);
  for (Eigen::Index k = 0; k < L; ++k) {
    start_coef(0, k) = static_cast<S>(u * static_cast<double>(k));
    end_coef(0, k) = static_cast<S>(u * static_cast<double>(L - 1 - k));
  }
  Expr<S> weighted =
      add(sum_all(cmul(log_floor(p_start, static_cast<S>(kProbFloor)),
                       g.constant(std::move(start_coef)))),
          sum_all(cmul(log_floor(p_end, static_cast<S>(kProbFloor)),
                       g.constant(std::move(end_coef)))));
  Expr<S> kl = add(g.scalar(static_cast<S>(std::log(u))), scale(weighted, S(-1)));
  return add(detail::nlog(pick(p_answer, 0, 0)), kl);
}

}  // namespace jointqa
