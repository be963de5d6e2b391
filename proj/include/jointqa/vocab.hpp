#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace jointqa {

/// Wordpiece inventory. Ids 0..3 are always [PAD], [UNK], [CLS], [SEP]; a
/// vocabulary file missing any of them gets the reserved entries prepended in
/// that order.
class PieceVocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kCls = 2;
  static constexpr int kSep = 3;

  PieceVocab() = default;
  explicit PieceVocab(std::vector<std::string> entries);

  static PieceVocab load(const std::string& path);
  void save(const std::string& path) const;

  /// Id of an exact entry (including any "##" marker), kUnk when absent.
  int id(std::string_view entry) const;
  bool contains(std::string_view entry) const;
  const std::string& entry(int id) const { return entries_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const { return entries_.size(); }

 private:
  std::vector<std::string> entries_;
  std::unordered_map<std::string, int> index_;
};

/// Character inventory used by the char CNN. Ids 0 and 1 are always [PAD]
/// and [UNK].
class CharVocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;

  CharVocab();
  explicit CharVocab(std::vector<std::string> entries);

  /// Collects every codepoint of the given lowercased texts (frequency >= 1),
  /// ordered by first appearance after the reserved entries.
  static CharVocab build(const std::vector<std::string>& texts);

  static CharVocab load(const std::string& path);
  void save(const std::string& path) const;

  int id(std::string_view codepoint) const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::vector<std::string> entries_;
  std::unordered_map<std::string, int> index_;
};

}  // namespace jointqa
