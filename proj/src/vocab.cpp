#include "jointqa/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>
#include <unordered_set>

#include "jointqa/utf8.hpp"

namespace jointqa {

namespace {

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open vocabulary file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write vocabulary file: " + path);
  for (const auto& l : lines) out << l << '\n';
}

}  // namespace

PieceVocab::PieceVocab(std::vector<std::string> entries) {
  static const std::vector<std::string> reserved = {"[PAD]", "[UNK]", "[CLS]", "[SEP]"};
  std::unordered_set<std::string> seen(entries.begin(), entries.end());
  for (auto it = reserved.rbegin(); it != reserved.rend(); ++it)
    if (!seen.count(*it)) entries.insert(entries.begin(), *it);
  entries_ = std::move(entries);
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    auto [_, fresh] = index_.emplace(entries_[i], static_cast<int>(i));
    if (!fresh) throw std::runtime_error("duplicate vocabulary entry: " + entries_[i]);
  }
  for (std::size_t i = 0; i < reserved.size(); ++i)
    if (entries_[i] != reserved[i])
      throw std::runtime_error("reserved entry " + reserved[i] + " is not at id " +
                               std::to_string(i));
}

PieceVocab PieceVocab::load(const std::string& path) { return PieceVocab(read_lines(path)); }

void PieceVocab::save(const std::string& path) const { write_lines(path, entries_); }

int PieceVocab::id(std::string_view entry) const {
  auto it = index_.find(std::string(entry));
  return it == index_.end() ? kUnk : it->second;
}

bool PieceVocab::contains(std::string_view entry) const {
  return index_.count(std::string(entry)) > 0;
}

CharVocab::CharVocab() : CharVocab(std::vector<std::string>{}) {}

CharVocab::CharVocab(std::vector<std::string> entries) {
  static const std::vector<std::string> reserved = {"[PAD]", "[UNK]"};
  std::unordered_set<std::string> seen(entries.begin(), entries.end());
  for (auto it = reserved.rbegin(); it != reserved.rend(); ++it)
    if (!seen.count(*it)) entries.insert(entries.begin(), *it);
  entries_ = std::move(entries);
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    auto [_, fresh] = index_.emplace(entries_[i], static_cast<int>(i));
    if (!fresh) throw std::runtime_error("duplicate character entry: " + entries_[i]);
  }
}

CharVocab CharVocab::build(const std::vector<std::string>& texts) {
  std::vector<std::string> entries;
  std::unordered_set<std::string> seen;
  for (const auto& t : texts) {
    for (auto& cp : utf8::codepoints(utf8::lower_fold(t))) {
      if (seen.insert(cp).second) entries.push_back(cp);
    }
  }
  return CharVocab(std::move(entries));
}

CharVocab CharVocab::load(const std::string& path) { return CharVocab(read_lines(path)); }

void CharVocab::save(const std::string& path) const { write_lines(path, entries_); }

int CharVocab::id(std::string_view codepoint) const {
  auto it = index_.find(std::string(codepoint));
  return it == index_.end() ? kUnk : it->second;
}

}  // namespace jointqa
