#include "jointqa/posterior.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace jointqa {

namespace {

// comparison-domain log: exact zeros keep zero mass (-inf); small positive
// values are floored so 32-bit underflow cannot flip comparisons
double flog(double x) {
  if (x <= 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(x < kProbFloor ? kProbFloor : x);
}

void validate(const PosteriorValues& pv) {
  if (pv.answer.size() != 2) throw std::invalid_argument("answer posterior must have 2 entries");
  if (pv.start.empty() || pv.start.size() != pv.end.size())
    throw std::invalid_argument("start/end posteriors must be non-empty and equal length");
}

}  // namespace

bool check_normalized(const PosteriorValues& pv, double tol) {
  validate(pv);
  auto ok = [tol](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) {
      if (x < 0.0) return false;
      s += x;
    }
    return std::abs(s - 1.0) <= tol;
  };
  return ok(pv.answer) && ok(pv.start) && ok(pv.end);
}

double joint_probability(const PosteriorValues& pv, int a, int i, int j) {
  validate(pv);
  const int L = static_cast<int>(pv.start.size());
  if (a != 0 && a != 1) throw std::invalid_argument("a must be 0 or 1");
  if (i < 0 || j < 0 || i >= L || j >= L) throw std::out_of_range("span index out of range");
  return pv.answer[static_cast<std::size_t>(a)] * pv.start[static_cast<std::size_t>(i)] *
         pv.end[static_cast<std::size_t>(j)];
}

SpanScore constrained_max(double coef, const std::vector<double>& start,
                          const std::vector<double>& end, bool upper) {
  if (start.empty() || start.size() != end.size())
    throw std::invalid_argument("start/end must be non-empty and equal length");
  const int L = static_cast<int>(start.size());
  std::vector<double> le(static_cast<std::size_t>(L));
  for (int j = 0; j < L; ++j) le[static_cast<std::size_t>(j)] = flog(end[static_cast<std::size_t>(j)]);

  SpanScore best;
  best.log_value = -std::numeric_limits<double>::infinity();
  const double lc = flog(coef);

  if (upper) {
    // suffix max of le with the smallest attaining j
    std::vector<double> suf(static_cast<std::size_t>(L));
    std::vector<int> sufarg(static_cast<std::size_t>(L));
    suf[static_cast<std::size_t>(L - 1)] = le[static_cast<std::size_t>(L - 1)];
    sufarg[static_cast<std::size_t>(L - 1)] = L - 1;
    for (int j = L - 2; j >= 0; --j) {
      if (le[static_cast<std::size_t>(j)] >= suf[static_cast<std::size_t>(j + 1)]) {
        suf[static_cast<std::size_t>(j)] = le[static_cast<std::size_t>(j)];
        sufarg[static_cast<std::size_t>(j)] = j;
      } else {
        suf[static_cast<std::size_t>(j)] = suf[static_cast<std::size_t>(j + 1)];
        sufarg[static_cast<std::size_t>(j)] = sufarg[static_cast<std::size_t>(j + 1)];
      }
    }
    for (int i = 0; i < L; ++i) {
      double cand = lc + flog(start[static_cast<std::size_t>(i)]) + suf[static_cast<std::size_t>(i)];
      if (!best.has_witness || cand > best.log_value) {
        best.log_value = cand;
        best.i = i;
        best.j = sufarg[static_cast<std::size_t>(i)];
        best.has_witness = true;
      }
    }
  } else {
    // prefix max of le with the smallest attaining j
    double pref = -std::numeric_limits<double>::infinity();
    int prefarg = -1;
    for (int i = 1; i < L; ++i) {
      if (prefarg < 0 || le[static_cast<std::size_t>(i - 1)] > pref) {
        pref = le[static_cast<std::size_t>(i - 1)];
        prefarg = i - 1;
      }
      double cand = lc + flog(start[static_cast<std::size_t>(i)]) + pref;
      if (!best.has_witness || cand > best.log_value) {
        best.log_value = cand;
        best.i = i;
        best.j = prefarg;
        best.has_witness = true;
      }
    }
  }
  if (best.has_witness)
    best.value = coef * start[static_cast<std::size_t>(best.i)] *
                 end[static_cast<std::size_t>(best.j)];
  else
    best.log_value = -std::numeric_limits<double>::infinity();
  return best;
}

Prediction decode(const PosteriorValues& pv) {
  validate(pv);
  SpanScore up = constrained_max(pv.answer[1], pv.start, pv.end, /*upper=*/true);
  SpanScore low = constrained_max(pv.answer[0], pv.start, pv.end, /*upper=*/false);
  Prediction pred;
  pred.score_answer = up.value;
  pred.score_no_answer = low.value;
  pred.answerable = !low.has_witness || up.log_value > low.log_value;
  if (pred.answerable) {
    pred.start = up.i;
    pred.end = up.j;
  }
  return pred;
}

}  // namespace jointqa
