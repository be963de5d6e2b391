#pragma once

#include <cstddef>
#include <vector>

namespace jointqa {

/// Probability floor used whenever a probability enters a log (keeps scores
/// finite for zeroed padded positions).
inline constexpr double kProbFloor = 1e-30;

/// Model output distributions for one example. answer holds the two-way
/// answerability posterior, start/end the per-position span posteriors over
/// L_c context pieces. Each vector sums to 1 on the real (unmasked) columns.
struct PosteriorValues {
  std::vector<double> answer;  // {P(no answer), P(answer)}
  std::vector<double> start;
  std::vector<double> end;
};

/// Checks each factor sums to 1 within tol and has no negative entries.
bool check_normalized(const PosteriorValues& pv, double tol);

/// Joint posterior value P(A=a, X1=i, X2=j) = answer[a] * start[i] * end[j].
/// The conditioning on A is architectural (it shapes how start/end are
/// produced), so a single start/end pair serves both values of a, and the
/// joint sums to exactly 1 over all (a, i, j). Throws on out-of-range indices.
double joint_probability(const PosteriorValues& pv, int a, int i, int j);

struct SpanScore {
  double value = 0.0;      // coef * start[i] * end[j] at the witness
  double log_value = 0.0;  // floored log, comparison domain
  bool has_witness = false;
  int i = 0;
  int j = 0;
};

/// Best coef * start[i] * end[j] over the upper (i <= j) or lower (i > j)
/// triangular region in O(L) time. Scores compare in log domain: values below
/// kProbFloor are floored (so 32-bit underflow cannot flip a comparison) but
/// exact zeros keep zero mass (-inf). Ties resolve to the smallest i, then
/// the smallest j; every non-empty region yields a witness. Only the lower
/// region with L < 2 is empty: has_witness = false and value 0.
SpanScore constrained_max(double coef, const std::vector<double>& start,
                          const std::vector<double>& end, bool upper);

struct Prediction {
  bool answerable = false;
  int start = 0;  // valid when answerable
  int end = 0;
  double score_answer = 0.0;
  double score_no_answer = 0.0;
};

/// Constrained argmax decode: answerable exactly when the best answerable
/// log-joint strictly beats the best no-answer log-joint, so zero answerable
/// mass never yields a span and ties fall to no-answer.
Prediction decode(const PosteriorValues& pv);

}  // namespace jointqa
