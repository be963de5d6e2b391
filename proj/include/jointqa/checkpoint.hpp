#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "jointqa/config.hpp"
#include "jointqa/graph.hpp"

namespace jointqa {

/// Binary checkpoint layout (little endian):
///   magic "JQCK", u32 version, u8 dtype (4 = float32, 8 = float64),
///   u64 config-JSON length, config JSON bytes,
///   u64 tensor count, then per tensor:
///     u64 name length, name bytes, u64 rows, u64 cols,
///     rows*cols scalars in column-major order.
inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr char kCheckpointMagic[4] = {'J', 'Q', 'C', 'K'};

namespace detail {

template <typename T>
void put(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& in, const std::string& path) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("truncated checkpoint: " + path);
  return v;
}

inline void put_str(std::ofstream& out, const std::string& s) {
  put<std::uint64_t>(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string get_str(std::ifstream& in, const std::string& path) {
  auto n = get<std::uint64_t>(in, path);
  std::string s(n, '\0');
  in.read(s.data(), static_cast<std::streamsize>(n));
  if (!in) throw std::runtime_error("truncated checkpoint: " + path);
  return s;
}

}  // namespace detail

template <typename S>
void save_checkpoint(const std::string& path, const ParameterStore<S>& ps,
                     const TrainConfig& cfg) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out.write(kCheckpointMagic, 4);
  detail::put<std::uint32_t>(out, kCheckpointVersion);
  detail::put<std::uint8_t>(out, static_cast<std::uint8_t>(sizeof(S)));
  nlohmann::json j = cfg;
  detail::put_str(out, j.dump());
  detail::put<std::uint64_t>(out, ps.size());
  for (const auto& p : ps) {
    detail::put_str(out, p->name);
    detail::put<std::uint64_t>(out, static_cast<std::uint64_t>(p->value.rows()));
    detail::put<std::uint64_t>(out, static_cast<std::uint64_t>(p->value.cols()));
    out.write(reinterpret_cast<const char*>(p->value.data()),
              static_cast<std::streamsize>(sizeof(S) * static_cast<std::size_t>(p->value.size())));
  }
  if (!out) throw std::runtime_error("short write while saving checkpoint: " + path);
}

/// Reads just the training configuration echoed into a checkpoint.
inline TrainConfig read_checkpoint_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kCheckpointMagic, 4) != 0)
    throw std::runtime_error("not a checkpoint file: " + path);
  auto version = detail::get<std::uint32_t>(in, path);
  if (version != kCheckpointVersion)
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(version) +
                             ": " + path);
  detail::get<std::uint8_t>(in, path);  // dtype, validated on load
  std::string cfg_json = detail::get_str(in, path);
  return nlohmann::json::parse(cfg_json).get<TrainConfig>();
}

/// Loads parameter values into an existing store. Every stored tensor must
/// match an existing parameter's shape exactly; mismatches (missing, extra,
/// or reshaped tensors) are collected and reported in one error.
template <typename S>
TrainConfig load_checkpoint(const std::string& path, ParameterStore<S>& ps) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kCheckpointMagic, 4) != 0)
    throw std::runtime_error("not a checkpoint file: " + path);
  auto version = detail::get<std::uint32_t>(in, path);
  if (version != kCheckpointVersion)
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(version) +
                             ": " + path);
  auto dtype = detail::get<std::uint8_t>(in, path);
  if (dtype != sizeof(S))
    throw std::runtime_error("checkpoint scalar width " + std::to_string(int(dtype)) +
                             " does not match model scalar width " +
                             std::to_string(sizeof(S)) + ": " + path);
  std::string cfg_json = detail::get_str(in, path);
  TrainConfig cfg = nlohmann::json::parse(cfg_json).get<TrainConfig>();

  auto count = detail::get<std::uint64_t>(in, path);
  std::vector<std::string> problems;
  std::vector<std::string> seen;
  for (std::uint64_t k = 0; k < count; ++k) {
    std::string name = detail::get_str(in, path);
    auto rows = static_cast<Eigen::Index>(detail::get<std::uint64_t>(in, path));
    auto cols = static_cast<Eigen::Index>(detail::get<std::uint64_t>(in, path));
    std::vector<S> buf(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols));
    in.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(sizeof(S) * buf.size()));
    if (!in) throw std::runtime_error("truncated checkpoint: " + path);
    seen.push_back(name);
    Parameter<S>* p = ps.find(name);
    if (!p) {
      problems.push_back(name + ": not present in this model");
      continue;
    }
    if (p->value.rows() != rows || p->value.cols() != cols) {
      problems.push_back(name + ": stored " + std::to_string(rows) + "x" +
                         std::to_string(cols) + ", model expects " +
                         std::to_string(p->value.rows()) + "x" +
                         std::to_string(p->value.cols()));
      continue;
    }
    std::memcpy(p->value.data(), buf.data(), sizeof(S) * buf.size());
  }
  for (const auto& p : ps) {
    bool found = false;
    for (const auto& s : seen)
      if (s == p->name) found = true;
    if (!found) problems.push_back(p->name + ": missing from checkpoint");
  }
  if (!problems.empty()) {
    std::string msg = "checkpoint " + path + " does not fit the model:";
    for (const auto& s : problems) msg += "\n  " + s;
    throw std::runtime_error(msg);
  }
  return cfg;
}

}  // namespace jointqa
