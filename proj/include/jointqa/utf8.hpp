#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace jointqa::utf8 {

/// Byte length of the UTF-8 sequence starting at s[pos] (1 for invalid bytes,
/// so iteration always makes progress).
inline std::size_t seq_len(std::string_view s, std::size_t pos) {
  unsigned char b = static_cast<unsigned char>(s[pos]);
  std::size_t n = 1;
  if ((b & 0x80u) == 0)
    n = 1;
  else if ((b & 0xE0u) == 0xC0u)
    n = 2;
  else if ((b & 0xF0u) == 0xE0u)
    n = 3;
  else if ((b & 0xF8u) == 0xF0u)
    n = 4;
  if (pos + n > s.size()) n = 1;
  return n;
}

/// Splits into codepoint substrings.
inline std::vector<std::string> codepoints(std::string_view s) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < s.size();) {
    std::size_t n = seq_len(s, i);
    out.emplace_back(s.substr(i, n));
    i += n;
  }
  return out;
}

inline std::size_t codepoint_count(std::string_view s) {
  std::size_t c = 0;
  for (std::size_t i = 0; i < s.size(); i += seq_len(s, i)) ++c;
  return c;
}

/// Byte offset of the codepoint with index cp_index; npos when out of range
/// (cp_index == count maps to s.size()).
inline std::size_t codepoint_to_byte(std::string_view s, std::size_t cp_index) {
  std::size_t c = 0;
  for (std::size_t i = 0; i < s.size(); i += seq_len(s, i)) {
    if (c == cp_index) return i;
    ++c;
  }
  return cp_index == c ? s.size() : std::string::npos;
}

inline std::size_t byte_to_codepoint(std::string_view s, std::size_t byte_off) {
  std::size_t c = 0;
  for (std::size_t i = 0; i < s.size() && i < byte_off; i += seq_len(s, i)) ++c;
  return c;
}

/// Lowercases ASCII A-Z and the Latin-1 supplement uppercase range
/// (byte-length preserving, which keeps offsets valid).
inline std::string lower_fold(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    std::size_t n = seq_len(s, i);
    if (n == 1) {
      char c = s[i];
      out.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c + 32) : c);
    } else if (n == 2) {
      unsigned char b0 = static_cast<unsigned char>(s[i]);
      unsigned char b1 = static_cast<unsigned char>(s[i + 1]);
      unsigned int cp = ((b0 & 0x1Fu) << 6) | (b1 & 0x3Fu);
      // U+00C0..U+00DE except U+00D7 (multiplication sign) lower by +0x20
      if (cp >= 0xC0u && cp <= 0xDEu && cp != 0xD7u) cp += 0x20u;
      out.push_back(static_cast<char>(0xC0u | (cp >> 6)));
      out.push_back(static_cast<char>(0x80u | (cp & 0x3Fu)));
    } else {
      out.append(s.substr(i, n));
    }
    i += n;
  }
  return out;
}

inline bool is_ascii_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

inline bool is_ascii_punct(char c) {
  unsigned char u = static_cast<unsigned char>(c);
  return (u >= 33 && u <= 47) || (u >= 58 && u <= 64) || (u >= 91 && u <= 96) ||
         (u >= 123 && u <= 126);
}

}  // namespace jointqa::utf8
