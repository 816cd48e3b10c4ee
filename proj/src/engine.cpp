#include "randpred/engine.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

#include "randpred/errors.hpp"

namespace randpred {

void EngineConfig::validate() const {
  universe.validate();
  smooth.validate();
  if (n < 16) throw std::invalid_argument("engine needs n >= 16");
  if (!(c4 >= 1.0)) throw std::invalid_argument("c4 must be >= 1");
  if (!(c_cap >= 0.0)) throw std::invalid_argument("c_cap must be non-negative");
  if (!(c_min > 0.0 && c_min <= 1.0)) throw std::invalid_argument("c_min must lie in (0, 1]");
  if (n >= universe.size()) throw std::invalid_argument("n must be smaller than the universe");
  if (bucket_count() < 2) {
    throw std::invalid_argument("n / (c4 log2 n) must leave at least two buckets");
  }
}

double EngineConfig::spacing() const { return c4 * std::log2(static_cast<double>(n)); }

std::uint64_t EngineConfig::bucket_count() const {
  return static_cast<std::uint64_t>(std::floor(static_cast<double>(n) / spacing()));
}

std::size_t EngineConfig::bucket_capacity() const {
  const double factor = c_cap > 0.0 ? c_cap : 4.0 * c4;
  return static_cast<std::size_t>(std::ceil(factor * std::log2(static_cast<double>(n))));
}

Engine Engine::preprocess(const EngineConfig& cfg, const KeySource& source) {
  cfg.validate();
  std::vector<Key> calibration(cfg.n);
  for (auto& k : calibration) k = source();
  return from_calibration(cfg, std::move(calibration), cfg.keep_calibration ? nullptr : &source);
}

Engine Engine::from_calibration(const EngineConfig& cfg, std::vector<Key> calibration,
                                const KeySource* fresh) {
  cfg.validate();
  if (calibration.size() != cfg.n) throw std::invalid_argument("calibration sample must hold n keys");
  for (Key k : calibration) {
    if (!cfg.universe.contains(k)) throw std::domain_error("calibration key outside the universe");
  }
  std::sort(calibration.begin(), calibration.end());

  Engine e;
  e.cfg_ = cfg;
  const std::uint64_t rho = cfg.bucket_count();
  const double spacing = cfg.spacing();
  e.reps_.resize(rho + 1);
  e.reps_[0] = 0;
  for (std::uint64_t i = 1; i < rho; ++i) {
    const auto position = static_cast<std::size_t>(std::floor(static_cast<double>(i) * spacing));
    e.reps_[i] = calibration[std::min(position, calibration.size()) - 1];
  }
  e.reps_[rho] = cfg.universe.size();

  // Representatives need pairwise distinct part indices; widen on collision.
  e.plan_ = plan_partition(cfg.n, cfg.smooth, cfg.universe);
  e.reduced_.resize(rho);
  while (true) {
    bool distinct = true;
    for (std::uint64_t i = 0; i < rho; ++i) {
      e.reduced_[i] = part_index(e.reps_[i], e.plan_, cfg.universe);
      if (i > 0 && e.reduced_[i] <= e.reduced_[i - 1]) distinct = false;
    }
    if (distinct) break;
    if (e.plan_retries_ == kMaxPlanRetries) {
      throw SmoothnessViolation("representatives share a partition part after " +
                                std::to_string(kMaxPlanRetries) + " widenings");
    }
    e.plan_ = widen_plan(e.plan_, cfg.universe);
    ++e.plan_retries_;
  }

  e.index_ = StaticPredIndex(e.reduced_, e.plan_.index_bits, cfg.kappa.kappa_for(rho));
  e.capacity_ = cfg.bucket_capacity();
  e.buckets_.reserve(rho);
  for (std::uint64_t i = 0; i < rho; ++i) e.buckets_.emplace_back(e.reps_[i], e.reps_[i + 1], e.capacity_);
  e.counts_.assign(rho, 0);
  e.nonempty_ = make_dyn_pred_set();
  e.overflow_ = make_dyn_pred_set();

  if (fresh != nullptr) {
    // The calibration sample only shaped the boundaries; refill from scratch.
    const std::uint64_t max_draws = 64 * cfg.n + 1024;
    std::uint64_t draws = 0;
    while (e.stored_ < cfg.n) {
      if (draws++ == max_draws) {
        throw SourceExhausted("key source produced too few distinct keys during re-insertion");
      }
      const Key k = (*fresh)();
      if (!cfg.universe.contains(k)) throw std::domain_error("source key outside the universe");
      const std::size_t i = e.find_bucket(k);
      if (e.member_in_bucket(i, k)) continue;
      e.insert_unchecked(i, k);
    }
  } else {
    calibration.erase(std::unique(calibration.begin(), calibration.end()), calibration.end());
    for (Key k : calibration) e.insert_unchecked(e.find_bucket(k), k);
  }
  e.phase_ = Phase::operational;
  e.b1_touches_.reset();
  e.b2_touches_.reset();
  e.b1_fallbacks_.reset();
  e.overflow_events_ = e.empty_events_ = e.transfer_events_ = 0;
  e.index_.reset_tallies();
  if (cfg.debug_checks) e.check_invariants();
  return e;
}

std::size_t Engine::find_bucket(Key y, unsigned* probes) const {
  const std::uint64_t reduced = part_index(y, plan_, cfg_.universe);
  std::size_t i = index_.pred(reduced, probes);
  // r_0 = 0 is indexed, so a predecessor always exists. Inside a shared
  // part the representative may still exceed y.
  if (reps_[i] > y) --i;
  return i;
}

std::optional<Key> Engine::pred_in_bucket(std::size_t i, Key y) const {
  std::optional<Key> best = buckets_[i].pred(y);
  if (overflown(i)) {
    b2_touches_.add();
    const auto spilled = overflow_->pred(y);
    if (spilled && *spilled >= reps_[i] && (!best || *spilled > *best)) best = spilled;
  }
  return best;
}

std::optional<Key> Engine::max_in_bucket(std::size_t i) const {
  return pred_in_bucket(i, reps_[i + 1] - 1);
}

bool Engine::member_in_bucket(std::size_t i, Key y) const {
  if (buckets_[i].contains(y)) return true;
  if (!overflown(i)) return false;
  b2_touches_.add();
  return overflow_->contains(y);
}

std::optional<Key> Engine::pred(Key y) const {
  const std::size_t i = find_bucket(y);
  if (auto found = pred_in_bucket(i, y)) return found;
  if (i == 0) return std::nullopt;
  std::size_t j = i - 1;
  if (counts_[j] == 0) {
    b1_touches_.add();
    const auto nonempty = nonempty_->pred(j);
    if (!nonempty) return std::nullopt;
    b1_fallbacks_.add();
    j = static_cast<std::size_t>(*nonempty);
  }
  return max_in_bucket(j);
}

bool Engine::member(Key y) const { return member_in_bucket(find_bucket(y), y); }

void Engine::insert_unchecked(std::size_t i, Key y) {
  if (counts_[i] >= capacity_) {
    b2_touches_.add();
    overflow_->insert(y);
    ++overflow_events_;
  } else if (buckets_[i].insert(y) == Bucket::InsertResult::full) {
    throw std::logic_error("bucket full below its counted capacity");
  }
  if (++counts_[i] == 1) {
    b1_touches_.add();
    nonempty_->insert(i);
  }
  ++stored_;
}

void Engine::insert(Key y) {
  const std::size_t i = find_bucket(y);
  if (member_in_bucket(i, y)) throw DuplicateKey("key " + std::to_string(y) + " already stored");
  if (phase_ == Phase::operational &&
      static_cast<double>(stored_ + 1) >= cfg_.smooth.c_max * static_cast<double>(cfg_.n)) {
    throw BandViolation("insert would reach c_max * n stored keys");
  }
  insert_unchecked(i, y);
  if (cfg_.debug_checks) check_invariants();
}

void Engine::erase(Key y) {
  const std::size_t i = find_bucket(y);
  if (!member_in_bucket(i, y)) throw AbsentKey("key " + std::to_string(y) + " not stored");
  if (phase_ == Phase::operational &&
      static_cast<double>(stored_ - 1) < cfg_.c_min * static_cast<double>(cfg_.n)) {
    throw BandViolation("delete would drop below c_min * n stored keys");
  }
  if (buckets_[i].erase(y) == Bucket::EraseResult::ok) {
    if (overflown(i)) {
      // Refill the bucket from its share of the overflow set.
      b2_touches_.add();
      const auto moved = overflow_->pred(reps_[i + 1] - 1);
      overflow_->erase(*moved);
      buckets_[i].insert(*moved);
      ++transfer_events_;
    }
  } else {
    b2_touches_.add();
    overflow_->erase(y);
  }
  if (--counts_[i] == 0) {
    b1_touches_.add();
    nonempty_->erase(i);
    ++empty_events_;
  }
  --stored_;
  if (cfg_.debug_checks) check_invariants();
}

void Engine::check_invariants() const {
  auto fail = [](const std::string& what) { throw std::logic_error("engine invariant: " + what); };
  const std::size_t rho = buckets_.size();
  std::uint64_t counted = 0;
  std::uint64_t in_buckets = 0;
  std::uint64_t nonempty = 0;
  std::vector<std::uint64_t> spilled(rho, 0);
  overflow_->for_each([&](Key k) {
    std::size_t i = static_cast<std::size_t>(std::upper_bound(reps_.begin(), reps_.end(), k) - reps_.begin()) - 1;
    if (i >= rho) fail("overflow key outside every bucket");
    ++spilled[i];
  });
  for (std::size_t i = 0; i < rho; ++i) {
    const Bucket& b = buckets_[i];
    counted += counts_[i];
    in_buckets += b.size();
    if (b.lo() != reps_[i] || b.hi() != reps_[i + 1]) fail("bucket interval differs from representatives");
    for (Key k : b.keys()) {
      if (k < reps_[i] || k >= reps_[i + 1]) fail("bucket key outside its interval");
    }
    if (b.size() != std::min<std::uint64_t>(counts_[i], capacity_)) {
      std::ostringstream msg;
      msg << "bucket " << i << " holds " << b.size() << " keys with count " << counts_[i];
      fail(msg.str());
    }
    if (b.size() + spilled[i] != counts_[i]) fail("bucket " + std::to_string(i) + " count mismatch");
    if (counts_[i] > 0) {
      ++nonempty;
      if (!nonempty_->contains(i)) fail("non-empty bucket missing from B1");
    }
  }
  if (counted != stored_) fail("sum of counters differs from stored count");
  if (in_buckets + overflow_->size() != stored_) fail("buckets plus overflow differ from stored count");
  if (nonempty != nonempty_->size()) fail("B1 holds an empty bucket");
}

EngineCounters Engine::counters() const {
  EngineCounters c;
  c.b1_touches = b1_touches_.get();
  c.b2_touches = b2_touches_.get();
  c.b1_fallbacks = b1_fallbacks_.get();
  c.overflow_events = overflow_events_;
  c.empty_events = empty_events_;
  c.transfer_events = transfer_events_;
  c.static_probes = index_.total_probes();
  c.static_queries = index_.total_queries();
  return c;
}

EngineStats Engine::stats() const {
  EngineStats s;
  s.n = cfg_.n;
  s.stored = stored_;
  s.buckets = buckets_.size();
  s.capacity = capacity_;
  const auto [lo, hi] = std::minmax_element(counts_.begin(), counts_.end());
  s.min_load = *lo;
  s.max_load = *hi;
  s.nonempty_buckets = nonempty_->size();
  s.overflow_size = overflow_->size();
  s.counters = counters();
  s.index_bits = plan_.index_bits;
  s.kappa = index_.kappa();
  s.index_space_bits = index_.space_bits();
  s.plan_retries = plan_retries_;
  return s;
}

std::vector<Key> Engine::stored_keys() const {
  std::vector<Key> keys;
  keys.reserve(stored_);
  for (const auto& b : buckets_) keys.insert(keys.end(), b.keys().begin(), b.keys().end());
  overflow_->for_each([&](Key k) { keys.push_back(k); });
  std::sort(keys.begin(), keys.end());
  return keys;
}

}  // namespace randpred
