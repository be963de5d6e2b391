#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "jointqa/squad.hpp"
#include "jointqa/tokenizer.hpp"

namespace jointqa {

/// Supervision target over context piece indices (inclusive span).
/// answerable == 0 means no span; start/end are then unused and kept at 0.
struct GoldLabel {
  int answerable = 0;
  int start = 0;
  int end = 0;
};

struct Feature {
  std::string example_id;
  std::vector<Piece> question;  // no structural pieces
  std::vector<Piece> context;   // >= 2 pieces, may end in a structural [PAD]
  std::optional<GoldLabel> gold;
  bool dropped = false;  // answerable but the span could not be aligned
};

struct FeaturizeOptions {
  std::size_t max_context_pieces = 384;  // tail truncation beyond this
  std::size_t max_question_pieces = 64;
};

struct FeaturizeStats {
  std::size_t total = 0;
  std::size_t truncated = 0;
  std::size_t dropped = 0;
  std::size_t unanswerable = 0;
};

struct AlignOutcome {
  std::optional<GoldLabel> gold;
  bool dropped = false;
};

/// Maps the example's first answer to an inclusive context-piece span.
/// Unanswerable examples yield answerable=0; an answerable example whose span
/// does not intersect the (possibly truncated) pieces is flagged dropped.
AlignOutcome align_answer(const Example& ex, const std::vector<Piece>& context_pieces);

Feature featurize_example(const Example& ex, const Tokenizer& tok,
                          const FeaturizeOptions& opt, FeaturizeStats* stats = nullptr);

std::vector<Feature> featurize(const std::vector<Example>& examples, const Tokenizer& tok,
                               const FeaturizeOptions& opt, FeaturizeStats* stats = nullptr);

/// Raw context substring covered by pieces [i, j] (byte spans).
std::string span_text(const std::string& context, const std::vector<Piece>& pieces, int i,
                      int j);

/// One JSON object per line, deterministic field order.
void write_features_jsonl(const std::string& path, const std::vector<Feature>& features);
std::vector<Feature> read_features_jsonl(const std::string& path);

std::string feature_to_json_line(const Feature& f);
Feature feature_from_json_line(const std::string& line);

}  // namespace jointqa
