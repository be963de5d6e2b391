#include "jointqa/tokenizer.hpp"

#include <stdexcept>

#include "jointqa/utf8.hpp"

namespace jointqa {

std::vector<RawToken> pretokenize(std::string_view folded_text) {
  std::vector<RawToken> out;
  std::size_t i = 0;
  const std::size_t n = folded_text.size();
  while (i < n) {
    if (utf8::is_ascii_space(folded_text[i])) {
      ++i;
      continue;
    }
    if (utf8::is_ascii_punct(folded_text[i])) {
      out.push_back({std::string(folded_text.substr(i, 1)), i, i + 1});
      ++i;
      continue;
    }
    std::size_t start = i;
    while (i < n && !utf8::is_ascii_space(folded_text[i]) &&
           !utf8::is_ascii_punct(folded_text[i]))
      i += utf8::seq_len(folded_text, i);
    out.push_back({std::string(folded_text.substr(start, i - start)), start, i});
  }
  return out;
}

Tokenizer::Tokenizer(const PieceVocab* pieces, const CharVocab* chars, std::size_t max_word_len)
    : pieces_(pieces), chars_(chars), max_word_len_(max_word_len) {
  if (!pieces || !chars) throw std::invalid_argument("tokenizer needs both vocabularies");
  if (max_word_len == 0) throw std::invalid_argument("max_word_len must be positive");
}

std::vector<int> Tokenizer::char_ids_for(std::string_view folded_surface) const {
  std::vector<int> ids(max_word_len_, CharVocab::kPad);
  std::size_t k = 0;
  for (std::size_t i = 0; i < folded_surface.size() && k < max_word_len_;) {
    std::size_t n = utf8::seq_len(folded_surface, i);
    ids[k++] = chars_->id(folded_surface.substr(i, n));
    i += n;
  }
  return ids;
}

std::vector<Piece> Tokenizer::split_word(std::string_view word, std::size_t base) const {
  std::vector<Piece> out;
  if (word.empty()) return out;
  std::size_t pos = 0;
  while (pos < word.size()) {
    std::size_t best = 0;
    for (std::size_t len = word.size() - pos; len >= 1; --len) {
      // do not split inside a UTF-8 sequence
      std::size_t end = pos + len;
      if (end < word.size() &&
          (static_cast<unsigned char>(word[end]) & 0xC0u) == 0x80u)
        continue;
      std::string cand(word.substr(pos, len));
      bool hit = pos == 0 ? pieces_->contains(cand)
                          : (pieces_->contains("##" + cand) || pieces_->contains(cand));
      if (hit) {
        best = len;
        break;
      }
    }
    if (best == 0) {
      // whole word collapses to a single unknown piece
      Piece p;
      p.text = "[UNK]";
      p.piece_id = PieceVocab::kUnk;
      p.is_continuation = false;
      p.char_ids = char_ids_for(word);
      p.byte_begin = base;
      p.byte_end = base + word.size();
      return {std::move(p)};
    }
    Piece p;
    p.text = std::string(word.substr(pos, best));
    p.is_continuation = pos > 0;
    if (p.is_continuation) {
      std::string marked = "##" + p.text;
      p.piece_id = pieces_->contains(marked) ? pieces_->id(marked) : pieces_->id(p.text);
    } else {
      p.piece_id = pieces_->id(p.text);
    }
    p.char_ids = char_ids_for(p.text);
    p.byte_begin = base + pos;
    p.byte_end = base + pos + best;
    out.push_back(std::move(p));
    pos += best;
  }
  return out;
}

std::vector<Piece> Tokenizer::tokenize(std::string_view raw_text) const {
  std::string folded = utf8::lower_fold(raw_text);
  std::vector<Piece> out;
  for (const auto& tok : pretokenize(folded)) {
    auto pieces = split_word(tok.text, tok.byte_begin);
    out.insert(out.end(), std::make_move_iterator(pieces.begin()),
               std::make_move_iterator(pieces.end()));
  }
  return out;
}

std::vector<std::string> Tokenizer::tokenize_to_strings(std::string_view raw_text) const {
  std::vector<std::string> out;
  for (const auto& p : tokenize(raw_text))
    out.push_back(p.is_continuation ? "##" + p.text : p.text);
  return out;
}

Piece Tokenizer::make_special(std::string_view symbol, std::size_t at_byte) const {
  Piece p;
  p.text = std::string(symbol);
  p.piece_id = pieces_->id(symbol);
  p.is_continuation = false;
  p.char_ids.assign(max_word_len_, CharVocab::kPad);
  p.byte_begin = at_byte;
  p.byte_end = at_byte;
  return p;
}

}  // namespace jointqa
