#include "randpred/fallback.hpp"

#include <string>

#include "randpred/errors.hpp"

namespace randpred {

void TreePredSet::insert(Key k) {
  if (!keys_.insert(k).second) throw DuplicateKey("key " + std::to_string(k) + " already present");
}

void TreePredSet::erase(Key k) {
  if (keys_.erase(k) == 0) throw AbsentKey("key " + std::to_string(k) + " not present");
}

bool TreePredSet::contains(Key k) const { return keys_.contains(k); }

std::optional<Key> TreePredSet::pred(Key k) const {
  auto it = keys_.upper_bound(k);
  if (it == keys_.begin()) return std::nullopt;
  return *std::prev(it);
}

void TreePredSet::for_each(const std::function<void(Key)>& visit) const {
  for (Key k : keys_) visit(k);
}

std::unique_ptr<DynPredSet> make_dyn_pred_set() { return std::make_unique<TreePredSet>(); }

}  // namespace randpred
