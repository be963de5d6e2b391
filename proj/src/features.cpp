#include "jointqa/features.hpp"

#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace jointqa {

namespace {
using ordered_json = nlohmann::ordered_json;
}

AlignOutcome align_answer(const Example& ex, const std::vector<Piece>& context_pieces) {
  AlignOutcome out;
  if (ex.is_impossible) {
    out.gold = GoldLabel{0, 0, 0};
    return out;
  }
  if (ex.answers.empty()) {
    out.dropped = true;
    return out;
  }
  const Answer& a = ex.answers.front();
  std::size_t abegin = a.answer_start;
  std::size_t aend = a.answer_start + a.text.size();
  int start = -1, end = -1;
  for (std::size_t k = 0; k < context_pieces.size(); ++k) {
    const Piece& p = context_pieces[k];
    if (p.byte_begin >= p.byte_end) continue;  // structural piece
    bool overlaps = p.byte_begin < aend && p.byte_end > abegin;
    if (overlaps) {
      if (start < 0) start = static_cast<int>(k);
      end = static_cast<int>(k);
    }
  }
  if (start < 0 ||
      context_pieces[static_cast<std::size_t>(end)].byte_end < aend) {
    out.dropped = true;  // outside the kept window or not covered
    return out;
  }
  out.gold = GoldLabel{1, start, end};
  return out;
}

Feature featurize_example(const Example& ex, const Tokenizer& tok,
                          const FeaturizeOptions& opt, FeaturizeStats* stats) {
  if (opt.max_context_pieces < 2)
    throw std::invalid_argument("max_context_pieces must be at least 2");
  Feature f;
  f.example_id = ex.id;
  f.question = tok.tokenize(ex.question);
  if (f.question.size() > opt.max_question_pieces)
    f.question.resize(opt.max_question_pieces);
  f.context = tok.tokenize(ex.context);
  bool truncated = f.context.size() > opt.max_context_pieces;
  if (truncated) f.context.resize(opt.max_context_pieces);
  while (f.context.size() < 2)
    f.context.push_back(tok.make_special("[PAD]", ex.context.size()));
  AlignOutcome aligned = align_answer(ex, f.context);
  f.gold = aligned.gold;
  f.dropped = aligned.dropped;
  if (stats) {
    ++stats->total;
    if (truncated) ++stats->truncated;
    if (f.dropped) ++stats->dropped;
    if (ex.is_impossible) ++stats->unanswerable;
  }
  return f;
}

std::vector<Feature> featurize(const std::vector<Example>& examples, const Tokenizer& tok,
                               const FeaturizeOptions& opt, FeaturizeStats* stats) {
  std::vector<Feature> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) out.push_back(featurize_example(ex, tok, opt, stats));
  return out;
}

std::string span_text(const std::string& context, const std::vector<Piece>& pieces, int i,
                      int j) {
  if (i < 0 || j < i || static_cast<std::size_t>(j) >= pieces.size())
    throw std::out_of_range("span indices out of range");
  std::size_t b = pieces[static_cast<std::size_t>(i)].byte_begin;
  std::size_t e = pieces[static_cast<std::size_t>(j)].byte_end;
  if (b > context.size() || e > context.size() || b > e)
    throw std::out_of_range("piece offsets exceed context");
  return context.substr(b, e - b);
}

namespace {

ordered_json piece_to_json(const Piece& p) {
  ordered_json j;
  j["text"] = p.text;
  j["piece_id"] = p.piece_id;
  j["cont"] = p.is_continuation;
  j["chars"] = p.char_ids;
  j["begin"] = p.byte_begin;
  j["end"] = p.byte_end;
  return j;
}

Piece piece_from_json(const ordered_json& j) {
  Piece p;
  p.text = j.at("text").get<std::string>();
  p.piece_id = j.at("piece_id").get<int>();
  p.is_continuation = j.at("cont").get<bool>();
  p.char_ids = j.at("chars").get<std::vector<int>>();
  p.byte_begin = j.at("begin").get<std::size_t>();
  p.byte_end = j.at("end").get<std::size_t>();
  return p;
}

}  // namespace

std::string feature_to_json_line(const Feature& f) {
  ordered_json j;
  j["id"] = f.example_id;
  j["question"] = ordered_json::array();
  for (const auto& p : f.question) j["question"].push_back(piece_to_json(p));
  j["context"] = ordered_json::array();
  for (const auto& p : f.context) j["context"].push_back(piece_to_json(p));
  if (f.gold) {
    j["gold"] = {{"answerable", f.gold->answerable},
                 {"start", f.gold->start},
                 {"end", f.gold->end}};
  } else {
    j["gold"] = nullptr;
  }
  j["dropped"] = f.dropped;
  return j.dump();
}

Feature feature_from_json_line(const std::string& line) {
  ordered_json j = ordered_json::parse(line);
  Feature f;
  f.example_id = j.at("id").get<std::string>();
  for (const auto& p : j.at("question")) f.question.push_back(piece_from_json(p));
  for (const auto& p : j.at("context")) f.context.push_back(piece_from_json(p));
  if (!j.at("gold").is_null()) {
    const auto& g = j.at("gold");
    f.gold = GoldLabel{g.at("answerable").get<int>(), g.at("start").get<int>(),
                       g.at("end").get<int>()};
  }
  f.dropped = j.at("dropped").get<bool>();
  return f;
}

void write_features_jsonl(const std::string& path, const std::vector<Feature>& features) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write features file: " + path);
  for (const auto& f : features) out << feature_to_json_line(f) << '\n';
}

std::vector<Feature> read_features_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open features file: " + path);
  std::vector<Feature> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(feature_from_json_line(line));
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace jointqa
