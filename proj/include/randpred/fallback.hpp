#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <set>

#include "randpred/partition.hpp"

namespace randpred {

/// Dynamic ordered integer set with predecessor search. The engine keeps two
/// of these: the indices of non-empty buckets and the keys that overflowed
/// their bucket. Both are touched only on rare events.
class DynPredSet {
 public:
  virtual ~DynPredSet() = default;

  /// Throws DuplicateKey if k is present.
  virtual void insert(Key k) = 0;
  /// Throws AbsentKey if k is missing.
  virtual void erase(Key k) = 0;
  [[nodiscard]] virtual bool contains(Key k) const = 0;
  /// Largest stored key <= k.
  [[nodiscard]] virtual std::optional<Key> pred(Key k) const = 0;
  [[nodiscard]] virtual std::size_t size() const = 0;
  /// Visits keys in increasing order.
  virtual void for_each(const std::function<void(Key)>& visit) const = 0;
};

/// Red-black tree backed set; O(log n) worst case per operation.
class TreePredSet final : public DynPredSet {
 public:
  void insert(Key k) override;
  void erase(Key k) override;
  [[nodiscard]] bool contains(Key k) const override;
  [[nodiscard]] std::optional<Key> pred(Key k) const override;
  [[nodiscard]] std::size_t size() const override { return keys_.size(); }
  void for_each(const std::function<void(Key)>& visit) const override;

 private:
  std::set<Key> keys_;
};

[[nodiscard]] std::unique_ptr<DynPredSet> make_dyn_pred_set();

}  // namespace randpred
