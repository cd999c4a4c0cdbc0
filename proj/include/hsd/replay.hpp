#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "hsd/random.hpp"

namespace hsd {

struct HighTransition {
  Eigen::VectorXd state;
  Eigen::MatrixXd observations;  // obs_dim x N
  std::vector<int> skills;
  double reward = 0.0;
  Eigen::VectorXd next_state;
  Eigen::MatrixXd next_observations;
  bool terminal = false;
};

struct LowTransition {
  Eigen::VectorXd observation;
  int skill = 0;
  int action = 0;
  double reward = 0.0;
  Eigen::VectorXd next_observation;
  bool terminal = false;
};

// Fixed-capacity FIFO ring buffer with uniform sampling (with replacement).
template <typename T>
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 100000) : capacity_(capacity) {
    items_.reserve(capacity_ < 4096 ? capacity_ : 4096);
  }

  void push(T item) {
    if (items_.size() < capacity_) {
      items_.push_back(std::move(item));
    } else {
      items_[head_] = std::move(item);
      head_ = (head_ + 1) % capacity_;
    }
  }

  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return items_.empty(); }

  // i-th oldest entry
  const T& at(std::size_t i) const { return items_[(head_ + i) % items_.size()]; }

  // Indices (in age order) of a uniform sample; nullopt when not ready.
  std::optional<std::vector<std::size_t>> sample_indices(std::size_t batch, Rng& rng) const {
    if (batch == 0 || items_.size() < batch) return std::nullopt;
    std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
    std::vector<std::size_t> idx(batch);
    for (auto& i : idx) i = pick(rng);
    return idx;
  }

  // Pointers stay valid until the next push.
  std::optional<std::vector<const T*>> sample_refs(std::size_t batch, Rng& rng) const {
    auto idx = sample_indices(batch, rng);
    if (!idx) return std::nullopt;
    std::vector<const T*> out;
    out.reserve(batch);
    for (std::size_t i : *idx) out.push_back(&at(i));
    return out;
  }

  std::optional<std::vector<T>> sample(std::size_t batch, Rng& rng) const {
    auto idx = sample_indices(batch, rng);
    if (!idx) return std::nullopt;
    std::vector<T> out;
    out.reserve(batch);
    for (std::size_t i : *idx) out.push_back(at(i));
    return out;
  }

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;
  std::vector<T> items_;
};

}  // namespace hsd
