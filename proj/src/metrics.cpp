#include "jointqa/metrics.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "jointqa/utf8.hpp"

namespace jointqa {

std::string normalize_text(const std::string& s) {
  std::string lowered = utf8::lower_fold(s);
  std::string no_punct;
  no_punct.reserve(lowered.size());
  for (std::size_t i = 0; i < lowered.size();) {
    std::size_t n = utf8::seq_len(lowered, i);
    if (!(n == 1 && utf8::is_ascii_punct(lowered[i]))) no_punct.append(lowered, i, n);
    i += n;
  }
  std::istringstream in(no_punct);
  std::string word, out;
  while (in >> word) {
    if (word == "a" || word == "an" || word == "the") continue;
    if (!out.empty()) out.push_back(' ');
    out += word;
  }
  return out;
}

namespace {

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

}  // namespace

PairScore f1_em(const std::string& prediction, const std::string& gold) {
  std::string p = normalize_text(prediction);
  std::string g = normalize_text(gold);
  PairScore s;
  s.em = p == g ? 1.0 : 0.0;
  if (p.empty() || g.empty()) {
    s.f1 = s.em;  // both empty scores 1, one-sided empty scores 0
    return s;
  }
  auto pt = split_ws(p);
  auto gt = split_ws(g);
  std::unordered_map<std::string, int> counts;
  for (const auto& t : gt) ++counts[t];
  int common = 0;
  for (const auto& t : pt) {
    auto it = counts.find(t);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++common;
    }
  }
  if (common == 0) {
    s.f1 = 0.0;
    return s;
  }
  double precision = static_cast<double>(common) / static_cast<double>(pt.size());
  double recall = static_cast<double>(common) / static_cast<double>(gt.size());
  s.f1 = 2.0 * precision * recall / (precision + recall);
  return s;
}

PairScore best_f1_em(const std::string& prediction, const std::vector<std::string>& golds) {
  if (golds.empty()) return f1_em(prediction, "");
  PairScore best;
  for (const auto& g : golds) {
    PairScore s = f1_em(prediction, g);
    best.f1 = std::max(best.f1, s.f1);
    best.em = std::max(best.em, s.em);
  }
  return best;
}

double avna(const std::vector<bool>& pred_answerable, const std::vector<bool>& gold_answerable) {
  if (pred_answerable.size() != gold_answerable.size())
    throw std::invalid_argument("avna: length mismatch between prediction and gold flags");
  if (pred_answerable.empty()) throw std::invalid_argument("avna: empty flag vectors");
  std::size_t agree = 0;
  for (std::size_t i = 0; i < pred_answerable.size(); ++i)
    if (pred_answerable[i] == gold_answerable[i]) ++agree;
  return 100.0 * static_cast<double>(agree) / static_cast<double>(pred_answerable.size());
}

EvalReport evaluate(const std::map<std::string, std::string>& predictions,
                    const std::map<std::string, std::vector<std::string>>& golds,
                    std::vector<ExampleScore>* per_example) {
  std::vector<std::string> missing;
  for (const auto& [id, _] : golds)
    if (!predictions.count(id)) missing.push_back(id);
  if (!missing.empty()) {
    std::string msg = "predictions missing for ids:";
    for (const auto& id : missing) msg += " " + id;
    throw std::runtime_error(msg);
  }
  if (golds.empty()) throw std::runtime_error("empty gold set");
  EvalReport r;
  r.total = golds.size();
  double f1 = 0.0, em = 0.0, avna = 0.0;
  for (const auto& [id, gold_answers] : golds) {
    const std::string& pred = predictions.at(id);
    PairScore s = best_f1_em(pred, gold_answers);
    bool gold_has_answer = false;
    for (const auto& g : gold_answers)
      if (!normalize_text(g).empty()) gold_has_answer = true;
    bool pred_has_answer = !normalize_text(pred).empty();
    bool agree = gold_has_answer == pred_has_answer;
    f1 += s.f1;
    em += s.em;
    avna += agree ? 1.0 : 0.0;
    if (per_example) per_example->push_back({id, s.f1, s.em, agree});
  }
  double n = static_cast<double>(r.total);
  r.f1 = 100.0 * f1 / n;
  r.em = 100.0 * em / n;
  r.avna = 100.0 * avna / n;
  return r;
}

}  // namespace jointqa
