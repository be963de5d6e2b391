#include "jointqa/runlog.hpp"

#include <chrono>
#include <ctime>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace jointqa {

using ordered_json = nlohmann::ordered_json;

std::string iso8601_now() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

RunLog::RunLog(const std::string& path, bool append)
    : out_(path, append ? std::ios::app : std::ios::trunc), path_(path) {
  if (!out_) throw std::runtime_error("cannot open run log for writing: " + path);
  if (append) {
    for (const auto& r : read(path)) last_step_ = r.step;
  }
}

void RunLog::write(const RunRecord& r) {
  if (r.step <= last_step_)
    throw std::runtime_error("run log steps must be strictly increasing (got " +
                             std::to_string(r.step) + " after " + std::to_string(last_step_) +
                             " in " + path_ + ")");
  ordered_json j;
  j["step"] = r.step;
  j["train_loss"] = r.train_loss;
  j["lr"] = r.lr;
  j["timestamp"] = r.timestamp.empty() ? iso8601_now() : r.timestamp;
  if (r.dev_f1) j["dev_f1"] = *r.dev_f1;
  if (r.dev_em) j["dev_em"] = *r.dev_em;
  if (r.dev_avna) j["dev_avna"] = *r.dev_avna;
  if (r.dev_nll) j["dev_nll"] = *r.dev_nll;
  out_ << j.dump() << '\n';
  out_.flush();
  last_step_ = r.step;
}

std::vector<RunRecord> RunLog::read(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open run log: " + path);
  std::vector<RunRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    ordered_json j;
    try {
      j = ordered_json::parse(line);
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    RunRecord r;
    r.step = j.at("step").get<long long>();
    r.train_loss = j.at("train_loss").get<double>();
    r.lr = j.at("lr").get<double>();
    r.timestamp = j.value("timestamp", std::string());
    if (j.contains("dev_f1")) r.dev_f1 = j["dev_f1"].get<double>();
    if (j.contains("dev_em")) r.dev_em = j["dev_em"].get<double>();
    if (j.contains("dev_avna")) r.dev_avna = j["dev_avna"].get<double>();
    if (j.contains("dev_nll")) r.dev_nll = j["dev_nll"].get<double>();
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace jointqa
