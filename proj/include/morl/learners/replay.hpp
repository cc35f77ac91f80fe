#pragma once

#include "morl/core.hpp"

#include <vector>

namespace morl::learners {

/// Unbounded experience store with seeded uniform sampling (with
/// replacement). Insertion order is preserved.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::uint64_t seed) : rng_(seed) {}

  void push(Experience e) { data_.push_back(std::move(e)); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }
  const Experience& operator[](std::size_t i) const { return data_[i]; }

  std::vector<std::size_t> sample_indices(int n) {
    if (data_.empty()) throw ContractViolation("replay: sampling from empty buffer");
    std::uniform_int_distribution<std::size_t> dist(0, data_.size() - 1);
    std::vector<std::size_t> out(static_cast<std::size_t>(n));
    for (auto& i : out) i = dist(rng_);
    return out;
  }

 private:
  std::vector<Experience> data_;
  rng_t rng_;
};

}  // namespace morl::learners
