#pragma once

// Binary checkpoint container: block name -> shape -> row-major values.
//
//   magic "HSDCKPT1", uint64 block count, then per block:
//   uint64 name length, name bytes, int64 rows, int64 cols, rows*cols float64
//   (little-endian, row-major).

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>

#include "hsd/approximators.hpp"

namespace hsd {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Checkpoint {
 public:
  // Stores every block of `params` under "<key>/<block name>".
  void put(const std::string& key, const nn::ParamSet& params);
  // Copies stored values into `params`; shapes must match exactly.
  void get(const std::string& key, nn::ParamSet& params) const;
  bool contains(const std::string& key) const;

  void put_matrix(const std::string& name, const nn::Matrix& m) { blocks_[name] = m; }
  const nn::Matrix& matrix(const std::string& name) const;
  const std::map<std::string, nn::Matrix>& blocks() const { return blocks_; }

  void save(const std::filesystem::path& path) const;
  static Checkpoint load(const std::filesystem::path& path);

 private:
  std::map<std::string, nn::Matrix> blocks_;
};

}  // namespace hsd
