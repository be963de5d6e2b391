#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "jointqa/vocab.hpp"

namespace jointqa {

/// One wordpiece. Byte offsets index the raw source string (case folding is
/// byte-length preserving, so folded offsets are raw offsets). Structural
/// pieces ([CLS], [SEP], [PAD]) carry an empty byte span and all-pad chars.
struct Piece {
  std::string text;           // folded surface, or the special symbol
  int piece_id = 0;
  bool is_continuation = false;
  std::vector<int> char_ids;  // zero-padded to max_word_len
  std::size_t byte_begin = 0;
  std::size_t byte_end = 0;
};

struct RawToken {
  std::string text;  // folded
  std::size_t byte_begin = 0;
  std::size_t byte_end = 0;
};

/// Splits folded text on ASCII whitespace, then peels each ASCII punctuation
/// character into its own token.
std::vector<RawToken> pretokenize(std::string_view folded_text);

class Tokenizer {
 public:
  Tokenizer(const PieceVocab* pieces, const CharVocab* chars, std::size_t max_word_len = 16);

  /// Folds, pretokenizes and wordpiece-splits raw text.
  std::vector<Piece> tokenize(std::string_view raw_text) const;

  /// Marker form of tokenize ("##" prefixes on continuations), for inspection.
  std::vector<std::string> tokenize_to_strings(std::string_view raw_text) const;

  /// Structural piece at the given byte position (empty span).
  Piece make_special(std::string_view symbol, std::size_t at_byte) const;

  /// Greedy longest-prefix split of one folded word. Word starts match plain
  /// entries; later positions match the longer of "##"+p and plain p. A stuck
  /// position turns the whole word into a single [UNK] piece (chars are still
  /// taken from the word itself).
  std::vector<Piece> split_word(std::string_view folded_word, std::size_t base_offset) const;

  std::size_t max_word_len() const { return max_word_len_; }
  const PieceVocab& pieces() const { return *pieces_; }
  const CharVocab& chars() const { return *chars_; }

 private:
  std::vector<int> char_ids_for(std::string_view folded_surface) const;

  const PieceVocab* pieces_;
  const CharVocab* chars_;
  std::size_t max_word_len_;
};

}  // namespace jointqa
