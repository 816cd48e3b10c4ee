#include "randpred/bucket.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "randpred/errors.hpp"

namespace randpred {

Bucket::Bucket(Key lo, Key hi, std::size_t capacity) : lo_(lo), hi_(hi), capacity_(capacity) {
  if (lo >= hi) throw std::invalid_argument("bucket interval must be non-empty");
  if (capacity == 0) throw std::invalid_argument("bucket capacity must be positive");
  keys_.reserve(capacity);
}

Bucket::InsertResult Bucket::insert(Key y) {
  if (y < lo_ || y >= hi_) {
    throw std::logic_error("key " + std::to_string(y) + " routed to bucket [" + std::to_string(lo_) +
                           ", " + std::to_string(hi_) + ")");
  }
  const auto it = std::lower_bound(keys_.begin(), keys_.end(), y);
  if (it != keys_.end() && *it == y) throw DuplicateKey("key " + std::to_string(y) + " already in bucket");
  if (full()) return InsertResult::full;
  keys_.insert(it, y);
  return InsertResult::ok;
}

Bucket::EraseResult Bucket::erase(Key y) {
  const auto it = std::lower_bound(keys_.begin(), keys_.end(), y);
  if (it == keys_.end() || *it != y) return EraseResult::absent;
  keys_.erase(it);
  return EraseResult::ok;
}

std::optional<Key> Bucket::pred(Key y) const {
  const auto it = std::upper_bound(keys_.begin(), keys_.end(), y);
  if (it == keys_.begin()) return std::nullopt;
  return *std::prev(it);
}

bool Bucket::contains(Key y) const { return std::binary_search(keys_.begin(), keys_.end(), y); }

std::optional<Key> Bucket::max() const {
  if (keys_.empty()) return std::nullopt;
  return keys_.back();
}

}  // namespace randpred
