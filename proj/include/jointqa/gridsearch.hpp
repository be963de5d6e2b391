#pragma once

#include <functional>
#include <string>
#include <vector>

namespace jointqa {

struct GridPoint {
  double lr = 0.0;
  int d_char_emb = 0;
  int d_lstm = 0;

  bool operator==(const GridPoint&) const = default;
};

struct GridAxes {
  std::vector<double> lr;
  std::vector<int> d_char_emb;
  std::vector<int> d_lstm;
};

/// Reference search space: 5 learning rates x 4 character widths x 3 LSTM
/// widths = 60 settings.
GridAxes default_grid_axes();

/// Deterministic nested enumeration, lr outermost, d_lstm innermost.
std::vector<GridPoint> enumerate_grid(const GridAxes& axes);

struct GridResult {
  GridPoint point;
  bool ok = false;
  double dev_f1 = 0.0;
  double dev_em = 0.0;
  double dev_avna = 0.0;
  std::string error;  // set when !ok
};

/// JSONL persistence. read() on a missing file returns empty (fresh search).
std::vector<GridResult> read_grid_results(const std::string& path);
void append_grid_result(const std::string& path, const GridResult& r);

bool grid_contains(const std::vector<GridResult>& done, const GridPoint& p);

/// Successful settings by dev F1 descending (ties keep enumeration order),
/// failed settings after all successes.
std::vector<GridResult> rank_grid_results(std::vector<GridResult> results);

/// Walks the grid in enumeration order, skipping settings already present in
/// results_path (resume), running run_one for the rest and appending each
/// outcome to results_path as it finishes. A throwing run_one records a
/// failed setting with the exception text instead of aborting the sweep.
/// Returns every result (prior + new) ranked.
std::vector<GridResult> run_grid(const GridAxes& axes, const std::string& results_path,
                                 const std::function<GridResult(const GridPoint&)>& run_one);

}  // namespace jointqa
