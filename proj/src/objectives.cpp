#include "jointqa/objectives.hpp"

#include <cmath>
#include <stdexcept>

namespace jointqa {

namespace {

double flog(double x) { return std::log(x < kProbFloor ? kProbFloor : x); }

void check_gold(const PosteriorValues& pv, const GoldLabel& gold) {
  const int L = static_cast<int>(pv.start.size());
  if (gold.answerable != 0 && gold.answerable != 1)
    throw std::invalid_argument("gold answerable flag must be 0 or 1");
  if (gold.answerable == 1) {
    if (gold.start < 0 || gold.end >= L || gold.start > gold.end)
      throw std::invalid_argument("gold span must satisfy 0 <= start <= end < L");
  }
}

}  // namespace

Eigen::MatrixXd partial_uniform(Eigen::Index L) {
  if (L < 2) throw std::invalid_argument("partial uniform target needs L >= 2");
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(L, L);
  const double u = 2.0 / (static_cast<double>(L - 1) * static_cast<double>(L));
  for (Eigen::Index i = 1; i < L; ++i)
    for (Eigen::Index j = 0; j < i; ++j) t(i, j) = u;
  return t;
}

double loss1(const PosteriorValues& pv, const GoldLabel& gold, bool single_answer_term) {
  check_gold(pv, gold);
  if (gold.answerable == 1) {
    return -flog(pv.answer[1]) - flog(pv.start[static_cast<std::size_t>(gold.start)]) -
           flog(pv.end[static_cast<std::size_t>(gold.end)]);
  }
  SpanScore low = constrained_max(pv.answer[0], pv.start, pv.end, /*upper=*/false);
  if (!low.has_witness)
    throw std::invalid_argument("no-answer loss needs L >= 2 context positions");
  double witness = -flog(pv.start[static_cast<std::size_t>(low.i)]) -
                   flog(pv.end[static_cast<std::size_t>(low.j)]);
  if (!single_answer_term) witness += -flog(pv.answer[0]);
  return -flog(pv.answer[0]) + witness;
}

double lower_region_kl(const PosteriorValues& pv) {
  const Eigen::Index L = static_cast<Eigen::Index>(pv.start.size());
  Eigen::MatrixXd target = partial_uniform(L);
  double kl = 0.0;
  for (Eigen::Index i = 0; i < L; ++i) {
    for (Eigen::Index j = 0; j < L; ++j) {
      double t = target(i, j);
      if (t <= 0.0) continue;
      double p = pv.start[static_cast<std::size_t>(i)] * pv.end[static_cast<std::size_t>(j)];
      kl += t * (std::log(t) - flog(p));
    }
  }
  return kl;
}

double loss2(const PosteriorValues& pv, const GoldLabel& gold) {
  check_gold(pv, gold);
  if (gold.answerable == 1) {
    return -flog(pv.answer[1]) - flog(pv.start[static_cast<std::size_t>(gold.start)]) -
           flog(pv.end[static_cast<std::size_t>(gold.end)]);
  }
  return -flog(pv.answer[0]) + lower_region_kl(pv);
}

double batch_loss(const std::vector<double>& per_example) {
  if (per_example.empty()) throw std::invalid_argument("batch loss over an empty batch");
  double s = 0.0;
  for (double x : per_example) s += x;
  return s / static_cast<double>(per_example.size());
}

}  // namespace jointqa
