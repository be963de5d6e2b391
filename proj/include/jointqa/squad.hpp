#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace jointqa {

struct Answer {
  std::string text;
  std::size_t answer_start = 0;  // byte offset into the context
};

struct Example {
  std::string id;
  std::string question;
  std::string context;
  bool is_impossible = false;
  std::vector<Answer> answers;  // empty when is_impossible
};

/// Loads a SQuAD 2.0 style JSON file. answer_start values in the file are
/// codepoint indices and get converted to byte offsets here; an answer text
/// that does not match the context at its stated position is a hard error
/// naming the offending question id. Structural problems name the JSON path.
std::vector<Example> load_squad(const std::string& path);

/// Parses the same structure from an in-memory JSON string (used by tests).
std::vector<Example> parse_squad(const std::string& json_text, const std::string& origin);

}  // namespace jointqa
