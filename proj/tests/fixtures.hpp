#pragma once

#include <array>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "jointqa/utf8.hpp"

// Shared corpora for tests: a 16-example synthetic set small enough to
// memorize in seconds, and two realistic paragraphs exercising accents,
// punctuation, subword splits and unanswerables.
namespace fixtures {

using nlohmann::ordered_json;

struct QaSpec {
  std::string id;
  std::string question;
  std::string answer;  // empty = impossible
};

struct ParagraphSpec {
  std::string context;
  std::vector<QaSpec> qas;
};

inline ordered_json paragraph_json(const ParagraphSpec& p) {
  ordered_json para;
  para["context"] = p.context;
  para["qas"] = ordered_json::array();
  for (const QaSpec& qa : p.qas) {
    ordered_json q;
    q["id"] = qa.id;
    q["question"] = qa.question;
    if (qa.answer.empty()) {
      q["is_impossible"] = true;
      q["answers"] = ordered_json::array();
    } else {
      q["is_impossible"] = false;
      std::size_t byte_off = p.context.find(qa.answer);
      if (byte_off == std::string::npos)
        throw std::logic_error("fixture answer not found in context: " + qa.answer);
      ordered_json a;
      a["text"] = qa.answer;
      a["answer_start"] = jointqa::utf8::byte_to_codepoint(p.context, byte_off);
      q["answers"] = ordered_json::array({a});
    }
    para["qas"].push_back(q);
  }
  return para;
}

inline std::string squad_json(const std::vector<ParagraphSpec>& paragraphs,
                              const std::string& title) {
  ordered_json root;
  root["version"] = "v2.0";
  ordered_json article;
  article["title"] = title;
  article["paragraphs"] = ordered_json::array();
  for (const auto& p : paragraphs) article["paragraphs"].push_back(paragraph_json(p));
  root["data"] = ordered_json::array({article});
  return root.dump();
}

/// 16 QA pairs over one-sentence contexts. 12 answerable (the place word),
/// 4 unanswerable (asking about an object the context does not mention).
inline std::string toy_squad_json() {
  static const std::array<const char*, 4> subjects{"anna", "omar", "lena", "ravi"};
  static const std::array<const char*, 4> objects{"lamp", "coin", "book", "keys"};
  static const std::array<const char*, 4> places{"door", "shelf", "table", "window"};
  std::vector<ParagraphSpec> paragraphs;
  for (int i = 0; i < 16; ++i) {
    const std::string subj = subjects[static_cast<std::size_t>(i % 4)];
    const std::string obj = objects[static_cast<std::size_t>(i / 4)];
    const std::string place = places[static_cast<std::size_t>((i * 3 + 1) % 4)];
    ParagraphSpec p;
    p.context = subj + " keeps the " + obj + " near the " + place + " .";
    QaSpec qa;
    qa.id = "toy-" + std::to_string(i);
    if (i % 4 != 3) {
      qa.question = "where is the " + obj + " kept ?";
      qa.answer = place;
    } else {
      const std::string other = objects[static_cast<std::size_t>((i / 4 + 1) % 4)];
      qa.question = "where is the " + other + " kept ?";
    }
    p.qas.push_back(qa);
    paragraphs.push_back(std::move(p));
  }
  return squad_json(paragraphs, "toy");
}

inline std::vector<std::string> toy_piece_entries() {
  return {"anna", "omar",  "lena",  "ravi",  "lamp", "coin", "book",   "keys",
          "door", "shelf", "table", "window", "keeps", "the", "near",  ".",
          "where", "is",   "kept",  "?"};
}

inline std::string lighthouse_context() {
  return "Margarethe Lindqvist tended the Skagen lighthouse from 1861 until 1894. "
         "Her logbooks, stored in the maritime archive at Aalborg, record 212 storms "
         "and the rescue of 47 sailors. After her retirement, the tower was fitted "
         "with a rotating Fresnel lens imported from Paris.";
}

inline std::string composer_context() {
  return "The composer Søren Ångström wrote his Première Symphonie "
         "in 1887 while living in Tromsø. Critics in København called the "
         "finale \"a storm of brass\", and the work was performed 31 times before 1900.";
}

/// Two paragraphs, six questions, two of them unanswerable.
inline std::string realistic_squad_json() {
  ParagraphSpec p1;
  p1.context = lighthouse_context();
  p1.qas = {
      {"real-0", "Who tended the Skagen lighthouse?", "Margarethe Lindqvist"},
      {"real-1", "How many sailors do the logbooks say were rescued?", "47"},
      {"real-2", "What color was the lighthouse painted?", ""},
  };
  ParagraphSpec p2;
  p2.context = composer_context();
  p2.qas = {
      {"real-3", "Where was Søren Ångström living when he wrote the "
                 "Première Symphonie?",
       "Tromsø"},
      {"real-4", "How many times was the work performed before 1900?", "31"},
      {"real-5", "Which orchestra premiered the symphony?", ""},
  };
  return squad_json({p1, p2}, "real");
}

/// Mixed coverage on purpose: most words whole, "symphonie" only reachable
/// through subword pieces, "lindqvist" absent entirely (unknown piece).
inline std::vector<std::string> realistic_piece_entries() {
  return {
      "margarethe", "tended",    "the",      "skagen",   "lighthouse", "from",
      "1861",       "until",     "1894",     "her",      "logbooks",   ",",
      "stored",     "in",        "maritime", "archive",  "at",         "aalborg",
      "record",     "212",       "storms",   "and",      "rescue",     "of",
      "47",         "sailors",   ".",        "after",    "retirement", "tower",
      "was",        "fitted",    "with",     "a",        "rotating",   "fresnel",
      "lens",       "imported",  "paris",    "composer", "søren",
      "ångström",      "wrote",    "his",      "première",
      "sym",        "##phon",    "##ie",     "1887",     "while",      "living",
      "tromsø", "critics",  "københavn",       "called",     "finale",
      "\"",         "storm",     "brass",    "work",     "performed",  "31",
      "times",      "before",    "1900",     "who",      "how",        "many",
      "do",         "say",       "were",     "rescued",  "?",          "what",
      "color",      "painted",   "where",    "when",     "he",         "which",
      "orchestra",  "premiered", "symphony", "is",       "kept",
  };
}

}  // namespace fixtures
