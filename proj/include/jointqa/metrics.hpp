#pragma once

#include <map>
#include <string>
#include <vector>

namespace jointqa {

/// Answer-string normalization: lowercase, strip ASCII punctuation, drop the
/// articles a/an/the, collapse whitespace. Applied before token overlap.
std::string normalize_text(const std::string& s);

struct PairScore {
  double f1 = 0.0;
  double em = 0.0;
};

/// Token-multiset overlap F1 and exact match between one prediction and one
/// gold string (both normalized first). Two empty normalized strings score 1.
PairScore f1_em(const std::string& prediction, const std::string& gold);

/// Best score against any gold. An empty gold list stands for "no answer"
/// and is treated as the single gold "".
PairScore best_f1_em(const std::string& prediction, const std::vector<std::string>& golds);

/// Answer-vs-no-answer agreement percentage between parallel answerability
/// flags. Lengths must match and be nonzero.
double avna(const std::vector<bool>& pred_answerable, const std::vector<bool>& gold_answerable);

struct EvalReport {
  double f1 = 0.0;    // percentages
  double em = 0.0;
  double avna = 0.0;  // answer-vs-no-answer agreement
  std::size_t total = 0;
};

struct ExampleScore {
  std::string id;
  double f1 = 0.0;
  double em = 0.0;
  bool avna_match = false;
};

/// Aggregates over the gold set. Every gold id must be present in
/// predictions; missing ids are a hard error listing them. golds maps id to
/// its acceptable answers (empty vector = unanswerable).
EvalReport evaluate(const std::map<std::string, std::string>& predictions,
                    const std::map<std::string, std::vector<std::string>>& golds,
                    std::vector<ExampleScore>* per_example = nullptr);

}  // namespace jointqa
