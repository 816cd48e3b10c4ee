#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "randpred/partition.hpp"

namespace randpred {

/// Fixed-capacity sorted array holding the keys of one interval [lo, hi).
class Bucket {
 public:
  enum class InsertResult { ok, full };
  enum class EraseResult { ok, absent };

  Bucket(Key lo, Key hi, std::size_t capacity);

  /// Throws DuplicateKey for a stored key and std::logic_error for a key
  /// outside [lo, hi). A full bucket is left unchanged.
  InsertResult insert(Key y);
  EraseResult erase(Key y);

  [[nodiscard]] std::optional<Key> pred(Key y) const;
  [[nodiscard]] bool contains(Key y) const;
  [[nodiscard]] std::optional<Key> max() const;

  [[nodiscard]] std::size_t size() const noexcept { return keys_.size(); }
  [[nodiscard]] std::size_t capacity() const noexcept { return capacity_; }
  [[nodiscard]] bool full() const noexcept { return keys_.size() >= capacity_; }
  [[nodiscard]] bool empty() const noexcept { return keys_.empty(); }
  [[nodiscard]] Key lo() const noexcept { return lo_; }
  [[nodiscard]] Key hi() const noexcept { return hi_; }
  [[nodiscard]] std::span<const Key> keys() const noexcept { return keys_; }

 private:
  Key lo_;
  Key hi_;
  std::size_t capacity_;
  std::vector<Key> keys_;
};

}  // namespace randpred
