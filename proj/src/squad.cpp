#include "jointqa/squad.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "jointqa/utf8.hpp"

namespace jointqa {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& origin, const std::string& path,
                       const std::string& what) {
  throw std::runtime_error(origin + ": " + path + ": " + what);
}

const json& need(const json& obj, const char* key, const std::string& origin,
                 const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(origin, path, std::string("missing field \"") + key + "\"");
  return *it;
}

std::vector<Example> parse(const json& root, const std::string& origin) {
  std::vector<Example> out;
  if (!root.is_object()) fail(origin, "$", "top level is not an object");
  const json& data = need(root, "data", origin, "$");
  if (!data.is_array()) fail(origin, "data", "not an array");
  for (std::size_t a = 0; a < data.size(); ++a) {
    std::string apath = "data[" + std::to_string(a) + "]";
    const json& article = data[a];
    if (!article.is_object()) fail(origin, apath, "not an object");
    const json& paragraphs = need(article, "paragraphs", origin, apath);
    if (!paragraphs.is_array()) fail(origin, apath + ".paragraphs", "not an array");
    for (std::size_t p = 0; p < paragraphs.size(); ++p) {
      std::string ppath = apath + ".paragraphs[" + std::to_string(p) + "]";
      const json& para = paragraphs[p];
      if (!para.is_object()) fail(origin, ppath, "not an object");
      const json& ctx = need(para, "context", origin, ppath);
      if (!ctx.is_string()) fail(origin, ppath + ".context", "not a string");
      std::string context = ctx.get<std::string>();
      const json& qas = need(para, "qas", origin, ppath);
      if (!qas.is_array()) fail(origin, ppath + ".qas", "not an array");
      for (std::size_t q = 0; q < qas.size(); ++q) {
        std::string qpath = ppath + ".qas[" + std::to_string(q) + "]";
        const json& qa = qas[q];
        if (!qa.is_object()) fail(origin, qpath, "not an object");
        Example ex;
        ex.context = context;
        const json& id = need(qa, "id", origin, qpath);
        if (!id.is_string()) fail(origin, qpath + ".id", "not a string");
        ex.id = id.get<std::string>();
        const json& question = need(qa, "question", origin, qpath);
        if (!question.is_string()) fail(origin, qpath + ".question", "not a string");
        ex.question = question.get<std::string>();
        ex.is_impossible = qa.value("is_impossible", false);
        if (!ex.is_impossible) {
          const json& answers = need(qa, "answers", origin, qpath);
          if (!answers.is_array() || answers.empty())
            fail(origin, qpath + ".answers", "answerable question without answers");
          for (std::size_t i = 0; i < answers.size(); ++i) {
            const json& ans = answers[i];
            std::string anspath = qpath + ".answers[" + std::to_string(i) + "]";
            if (!ans.is_object()) fail(origin, anspath, "not an object");
            Answer a2;
            a2.text = need(ans, "text", origin, anspath).get<std::string>();
            auto cp_start = need(ans, "answer_start", origin, anspath).get<long long>();
            if (cp_start < 0) fail(origin, anspath, "negative answer_start");
            std::size_t byte_off =
                utf8::codepoint_to_byte(context, static_cast<std::size_t>(cp_start));
            if (byte_off == std::string::npos ||
                context.compare(byte_off, a2.text.size(), a2.text) != 0)
              throw std::runtime_error(origin + ": question " + ex.id +
                                       ": answer text does not match context at "
                                       "answer_start " +
                                       std::to_string(cp_start));
            a2.answer_start = byte_off;
            ex.answers.push_back(std::move(a2));
          }
        }
        out.push_back(std::move(ex));
      }
    }
  }
  return out;
}

}  // namespace

std::vector<Example> parse_squad(const std::string& json_text, const std::string& origin) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(origin + ": invalid JSON: " + e.what());
  }
  return parse(root, origin);
}

std::vector<Example> load_squad(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open data file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_squad(buf.str(), path);
}

}  // namespace jointqa
