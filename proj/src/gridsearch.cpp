#include "jointqa/gridsearch.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace jointqa {

using ordered_json = nlohmann::ordered_json;

GridAxes default_grid_axes() {
  return GridAxes{{2e-5, 5e-5, 6e-5, 7e-5, 10e-5}, {16, 32, 64, 80}, {32, 64, 128}};
}

std::vector<GridPoint> enumerate_grid(const GridAxes& axes) {
  if (axes.lr.empty() || axes.d_char_emb.empty() || axes.d_lstm.empty())
    throw std::invalid_argument("every grid axis needs at least one value");
  std::vector<GridPoint> out;
  out.reserve(axes.lr.size() * axes.d_char_emb.size() * axes.d_lstm.size());
  for (double lr : axes.lr)
    for (int ce : axes.d_char_emb)
      for (int dl : axes.d_lstm) out.push_back({lr, ce, dl});
  return out;
}

std::vector<GridResult> read_grid_results(const std::string& path) {
  std::ifstream in(path);
  if (!in) return {};
  std::vector<GridResult> out;
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
    GridResult r;
    r.point.lr = j.at("lr").get<double>();
    r.point.d_char_emb = j.at("d_char_emb").get<int>();
    r.point.d_lstm = j.at("d_lstm").get<int>();
    r.ok = j.at("ok").get<bool>();
    if (r.ok) {
      r.dev_f1 = j.at("dev_f1").get<double>();
      r.dev_em = j.at("dev_em").get<double>();
      r.dev_avna = j.at("dev_avna").get<double>();
    } else {
      r.error = j.value("error", std::string());
    }
    out.push_back(std::move(r));
  }
  return out;
}

void append_grid_result(const std::string& path, const GridResult& r) {
  std::ofstream out(path, std::ios::app);
  if (!out) throw std::runtime_error("cannot append to grid results: " + path);
  ordered_json j;
  j["lr"] = r.point.lr;
  j["d_char_emb"] = r.point.d_char_emb;
  j["d_lstm"] = r.point.d_lstm;
  j["ok"] = r.ok;
  if (r.ok) {
    j["dev_f1"] = r.dev_f1;
    j["dev_em"] = r.dev_em;
    j["dev_avna"] = r.dev_avna;
  } else {
    j["error"] = r.error;
  }
  out << j.dump() << '\n';
}

bool grid_contains(const std::vector<GridResult>& done, const GridPoint& p) {
  return std::any_of(done.begin(), done.end(),
                     [&](const GridResult& r) { return r.point == p; });
}

std::vector<GridResult> rank_grid_results(std::vector<GridResult> results) {
  std::stable_sort(results.begin(), results.end(), [](const GridResult& a, const GridResult& b) {
    if (a.ok != b.ok) return a.ok;  // successes first
    if (a.ok && b.ok) return a.dev_f1 > b.dev_f1;
    return false;
  });
  return results;
}

std::vector<GridResult> run_grid(const GridAxes& axes, const std::string& results_path,
                                 const std::function<GridResult(const GridPoint&)>& run_one) {
  std::vector<GridResult> done = read_grid_results(results_path);
  for (const GridPoint& point : enumerate_grid(axes)) {
    if (grid_contains(done, point)) continue;
    GridResult r;
    try {
      r = run_one(point);
      r.point = point;
    } catch (const std::exception& e) {
      r = GridResult{point, false, 0.0, 0.0, 0.0, e.what()};
    }
    append_grid_result(results_path, r);
    done.push_back(std::move(r));
  }
  return rank_grid_results(std::move(done));
}

}  // namespace jointqa
