#pragma once

// Versioned binary dump of named parameter tensors plus string metadata.
// Values are stored as their IEEE-754 bit patterns, so a reload is exact.
//
// Layout (little-endian):
//   magic "FRDCKPT\0" | u32 version
//   u32 meta_count  { str key | str value }*
//   u32 tensor_count { str name | u32 rank | u64 dims[rank] | f64 data[] }*
// where str = u32 length followed by the bytes.

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "frdetect/tensor.hpp"

namespace frdetect {

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

inline constexpr char kCheckpointMagic[8] = {'F', 'R', 'D', 'C', 'K', 'P', 'T', '\0'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  std::map<std::string, std::string> metadata;
  std::vector<std::pair<std::string, Tensor>> tensors;

  const Tensor& tensor(const std::string& name) const {
    for (const auto& [n, t] : tensors)
      if (n == name) return t;
    throw Error("checkpoint has no tensor '" + name + "'");
  }

  const std::string& meta(const std::string& key) const {
    auto it = metadata.find(key);
    if (it == metadata.end()) throw Error("checkpoint has no metadata '" + key + "'");
    return it->second;
  }
};

namespace detail {

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

inline void put_string(std::ostream& out, const std::string& s) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v))
    throw Error("checkpoint is truncated");
  return v;
}

inline std::string get_string(std::istream& in) {
  const auto n = get<std::uint32_t>(in);
  if (n > (1u << 24)) throw Error("checkpoint string length is implausible");
  std::string s(n, '\0');
  if (!in.read(s.data(), n)) throw Error("checkpoint is truncated");
  return s;
}

}  // namespace detail

inline void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write checkpoint " + path);
  out.write(kCheckpointMagic, sizeof kCheckpointMagic);
  detail::put<std::uint32_t>(out, kCheckpointVersion);
  detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.metadata.size()));
  for (const auto& [k, v] : ckpt.metadata) {
    detail::put_string(out, k);
    detail::put_string(out, v);
  }
  detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.tensors.size()));
  for (const auto& [name, t] : ckpt.tensors) {
    detail::put_string(out, name);
    detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(t.rank()));
    for (std::size_t d : t.shape()) detail::put<std::uint64_t>(out, d);
    out.write(reinterpret_cast<const char*>(t.raw().data()),
              static_cast<std::streamsize>(t.size() * sizeof(double)));
  }
  if (!out) throw Error("failed writing checkpoint " + path);
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint " + path);
  char magic[sizeof kCheckpointMagic];
  if (!in.read(magic, sizeof magic) ||
      std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0) {
    throw Error(path + " is not a checkpoint file");
  }
  const auto version = detail::get<std::uint32_t>(in);
  if (version != kCheckpointVersion) {
    throw Error("unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint ckpt;
  const auto metas = detail::get<std::uint32_t>(in);
  for (std::uint32_t i = 0; i < metas; ++i) {
    std::string k = detail::get_string(in);
    ckpt.metadata[k] = detail::get_string(in);
  }
  const auto count = detail::get<std::uint32_t>(in);
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = detail::get_string(in);
    const auto rank = detail::get<std::uint32_t>(in);
    if (rank == 0 || rank > 8) throw Error("checkpoint tensor rank is implausible");
    Shape shape(rank);
    for (auto& d : shape) d = detail::get<std::uint64_t>(in);
    std::vector<double> data(shape_size(shape));
    if (!in.read(reinterpret_cast<char*>(data.data()),
                 static_cast<std::streamsize>(data.size() * sizeof(double)))) {
      throw Error("checkpoint is truncated");
    }
    ckpt.tensors.emplace_back(std::move(name), Tensor(std::move(shape), std::move(data)));
  }
  return ckpt;
}

}  // namespace frdetect
