#include "hsd/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

namespace hsd {

namespace {

constexpr char kMagic[8] = {'H', 'S', 'D', 'C', 'K', 'P', 'T', '1'};

template <typename T>
void write_pod(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw CheckpointError("truncated checkpoint");
  return v;
}

}  // namespace

void Checkpoint::put(const std::string& key, const nn::ParamSet& params) {
  for (int i = 0; i < params.size(); ++i) {
    blocks_[key + "/" + params.block(i).name] = params.value(i);
  }
}

void Checkpoint::get(const std::string& key, nn::ParamSet& params) const {
  for (int i = 0; i < params.size(); ++i) {
    const std::string name = key + "/" + params.block(i).name;
    const nn::Matrix& m = matrix(name);
    if (m.rows() != params.value(i).rows() || m.cols() != params.value(i).cols()) {
      throw CheckpointError("shape mismatch for block " + name);
    }
    params.value(i) = m;
  }
}

bool Checkpoint::contains(const std::string& key) const {
  const std::string prefix = key + "/";
  auto it = blocks_.lower_bound(prefix);
  return it != blocks_.end() && it->first.compare(0, prefix.size(), prefix) == 0;
}

const nn::Matrix& Checkpoint::matrix(const std::string& name) const {
  auto it = blocks_.find(name);
  if (it == blocks_.end()) throw CheckpointError("missing block " + name);
  return it->second;
}

void Checkpoint::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot write " + path.string());
  out.write(kMagic, sizeof(kMagic));
  write_pod<uint64_t>(out, blocks_.size());
  for (const auto& [name, m] : blocks_) {
    write_pod<uint64_t>(out, name.size());
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_pod<int64_t>(out, m.rows());
    write_pod<int64_t>(out, m.cols());
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) write_pod<double>(out, m(r, c));
    }
  }
  if (!out) throw CheckpointError("failed writing " + path.string());
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot read " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw CheckpointError("not a checkpoint file: " + path.string());
  }
  Checkpoint ck;
  const auto count = read_pod<uint64_t>(in);
  for (uint64_t b = 0; b < count; ++b) {
    const auto len = read_pod<uint64_t>(in);
    if (len > (1u << 16)) throw CheckpointError("corrupt block name");
    std::string name(len, '\0');
    in.read(name.data(), static_cast<std::streamsize>(len));
    const auto rows = read_pod<int64_t>(in);
    const auto cols = read_pod<int64_t>(in);
    if (rows < 0 || cols < 0) throw CheckpointError("corrupt block shape");
    nn::Matrix m(rows, cols);
    for (int64_t r = 0; r < rows; ++r) {
      for (int64_t c = 0; c < cols; ++c) m(r, c) = read_pod<double>(in);
    }
    ck.blocks_[name] = std::move(m);
  }
  return ck;
}

}  // namespace hsd
