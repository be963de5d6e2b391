#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace jointqa {

struct RunRecord {
  long long step = 0;
  double train_loss = 0.0;
  double lr = 0.0;
  std::string timestamp;  // ISO 8601 UTC
  std::optional<double> dev_f1;
  std::optional<double> dev_em;
  std::optional<double> dev_avna;
  std::optional<double> dev_nll;
};

std::string iso8601_now();

/// Append-only JSONL training log. Steps must be strictly increasing within
/// one writer; violations throw.
class RunLog {
 public:
  explicit RunLog(const std::string& path, bool append = false);

  void write(const RunRecord& r);

  static std::vector<RunRecord> read(const std::string& path);

 private:
  std::ofstream out_;
  std::string path_;
  long long last_step_ = -1;
};

}  // namespace jointqa
