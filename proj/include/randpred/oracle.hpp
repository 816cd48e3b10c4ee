#pragma once

#include <algorithm>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "randpred/errors.hpp"
#include "randpred/partition.hpp"

namespace randpred {

// Sorted-vector reference set used by the equivalence tests and the harness.
class OracleSet {
 public:
  OracleSet() = default;
  explicit OracleSet(std::vector<Key> keys) : keys_(std::move(keys)) {
    std::sort(keys_.begin(), keys_.end());
    keys_.erase(std::unique(keys_.begin(), keys_.end()), keys_.end());
  }

  void insert(Key k) {
    auto it = std::lower_bound(keys_.begin(), keys_.end(), k);
    if (it != keys_.end() && *it == k) throw DuplicateKey("oracle: duplicate " + std::to_string(k));
    keys_.insert(it, k);
  }

  void erase(Key k) {
    auto it = std::lower_bound(keys_.begin(), keys_.end(), k);
    if (it == keys_.end() || *it != k) throw AbsentKey("oracle: absent " + std::to_string(k));
    keys_.erase(it);
  }

  [[nodiscard]] bool contains(Key k) const { return std::binary_search(keys_.begin(), keys_.end(), k); }

  [[nodiscard]] std::optional<Key> pred(Key k) const {
    auto it = std::upper_bound(keys_.begin(), keys_.end(), k);
    if (it == keys_.begin()) return std::nullopt;
    return *std::prev(it);
  }

  [[nodiscard]] std::size_t size() const noexcept { return keys_.size(); }
  [[nodiscard]] std::span<const Key> keys() const noexcept { return keys_; }

 private:
  std::vector<Key> keys_;
};

}  // namespace randpred
