#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "randpred/bucket.hpp"
#include "randpred/fallback.hpp"
#include "randpred/partition.hpp"
#include "randpred/static_pred.hpp"

namespace randpred {

struct EngineConfig {
  /// Calibration file size; also the reference size of the load band.
  std::uint64_t n = std::uint64_t{1} << 14;
  UniverseParams universe;
  SmoothParams smooth;
  /// Representatives are every (c4 * log2 n)-th calibration order statistic.
  double c4 = 8.0;
  KappaChoice kappa;
  /// Bucket capacity is ceil(c_cap * log2 n); 0 selects 4 * c4.
  double c_cap = 0.0;
  /// Lower end of the load band; the upper end is smooth.c_max.
  double c_min = 1.0;
  std::uint64_t seed = 1;
  /// Keep the calibration keys as the initial contents instead of
  /// re-inserting n fresh draws.
  bool keep_calibration = false;
  /// Run check_invariants() after every update.
  bool debug_checks = false;

  void validate() const;
  [[nodiscard]] double spacing() const;
  [[nodiscard]] std::uint64_t bucket_count() const;
  [[nodiscard]] std::size_t bucket_capacity() const;
};

enum class Phase { preprocessing, operational };

/// Event tallies of the operational phase. Query-path counters are relaxed atomics so concurrent
/// readers between writes stay safe.
struct EngineCounters {
  std::uint64_t b1_touches = 0;
  std::uint64_t b2_touches = 0;
  std::uint64_t overflow_events = 0;   // inserts diverted to the overflow set
  std::uint64_t empty_events = 0;      // buckets that became empty
  std::uint64_t transfer_events = 0;   // overflow keys moved back into a bucket
  std::uint64_t b1_fallbacks = 0;      // predecessor answers found through B1
  std::uint64_t static_probes = 0;
  std::uint64_t static_queries = 0;
};

struct EngineStats {
  std::uint64_t n = 0;
  std::uint64_t stored = 0;
  std::uint64_t buckets = 0;
  std::size_t capacity = 0;
  std::uint64_t max_load = 0;
  std::uint64_t min_load = 0;
  std::uint64_t nonempty_buckets = 0;
  std::size_t overflow_size = 0;
  EngineCounters counters;
  unsigned index_bits = 0;
  unsigned kappa = 0;
  std::uint64_t index_space_bits = 0;
  unsigned plan_retries = 0;
};

using KeySource = std::function<Key()>;

/// Dynamic predecessor structure for keys from a smooth distribution.
///
/// Preprocessing sorts n calibration keys, keeps every (c4 log2 n)-th as a
/// bucket boundary, names the boundaries by their part in an equal-width
/// partition of the universe and indexes those names statically. Keys then
/// live in fixed-capacity buckets between consecutive boundaries. Keys that do
/// not fit in a full bucket go to an overflow set, and a second set tracks the
/// non-empty buckets so predecessor queries can skip empty ones.
///
/// Single writer. Readers may run concurrently only between writes.
class Engine {
 public:
  static constexpr unsigned kMaxPlanRetries = 3;

  /// Draws n calibration keys from `source`, builds the structure, then fills
  /// it with n fresh distinct draws (or the calibration keys when
  /// cfg.keep_calibration is set).
  ///
  /// Throws SmoothnessViolation when representatives keep colliding after
  /// kMaxPlanRetries widenings, SourceExhausted when the source stops
  /// producing new keys.
  [[nodiscard]] static Engine preprocess(const EngineConfig& cfg, const KeySource& source);

  /// Same as preprocess() with an explicit calibration sample. With
  /// `fresh == nullptr` the distinct calibration keys become the contents.
  [[nodiscard]] static Engine from_calibration(const EngineConfig& cfg, std::vector<Key> calibration,
                                               const KeySource* fresh);

  /// Bucket i with r_i <= y < r_{i+1}.
  [[nodiscard]] std::size_t find_bucket(Key y, unsigned* probes = nullptr) const;
  [[nodiscard]] std::optional<Key> pred(Key y) const;
  [[nodiscard]] bool member(Key y) const;
  /// Throws DuplicateKey, or BandViolation when the stored count would
  /// reach c_max * n.
  void insert(Key y);
  /// Throws AbsentKey, or BandViolation when the stored count would drop
  /// below c_min * n.
  void erase(Key y);

  /// Throws std::logic_error describing the first broken accounting rule.
  void check_invariants() const;

  [[nodiscard]] EngineStats stats() const;
  [[nodiscard]] EngineCounters counters() const;
  [[nodiscard]] std::uint64_t size() const noexcept { return stored_; }
  [[nodiscard]] Phase phase() const noexcept { return phase_; }
  [[nodiscard]] const EngineConfig& config() const noexcept { return cfg_; }
  [[nodiscard]] const PartitionPlan& plan() const noexcept { return plan_; }
  [[nodiscard]] const StaticPredIndex& index() const noexcept { return index_; }
  /// r_0 .. r_rho, with r_0 = 0 and r_rho = 2^bits.
  [[nodiscard]] std::span<const Key> representatives() const noexcept { return reps_; }
  /// Part indices of r_0 .. r_{rho-1}.
  [[nodiscard]] std::span<const std::uint64_t> reduced_representatives() const noexcept { return reduced_; }
  [[nodiscard]] std::span<const std::uint32_t> loads() const noexcept { return counts_; }
  [[nodiscard]] const Bucket& bucket(std::size_t i) const { return buckets_.at(i); }
  [[nodiscard]] const DynPredSet& nonempty_set() const noexcept { return *nonempty_; }
  [[nodiscard]] const DynPredSet& overflow_set() const noexcept { return *overflow_; }
  /// Every stored key in increasing order.
  [[nodiscard]] std::vector<Key> stored_keys() const;

 private:
  class Tally {
   public:
    Tally() = default;
    Tally(const Tally& other) : value_(other.get()) {}
    Tally& operator=(const Tally& other) {
      value_.store(other.get(), std::memory_order_relaxed);
      return *this;
    }
    void add(std::uint64_t d = 1) const { value_.fetch_add(d, std::memory_order_relaxed); }
    void reset() { value_.store(0, std::memory_order_relaxed); }
    [[nodiscard]] std::uint64_t get() const { return value_.load(std::memory_order_relaxed); }

   private:
    mutable std::atomic<std::uint64_t> value_{0};
  };

  Engine() = default;

  [[nodiscard]] bool overflown(std::size_t i) const { return counts_[i] > capacity_; }
  [[nodiscard]] std::optional<Key> pred_in_bucket(std::size_t i, Key y) const;
  [[nodiscard]] std::optional<Key> max_in_bucket(std::size_t i) const;
  [[nodiscard]] bool member_in_bucket(std::size_t i, Key y) const;
  void insert_unchecked(std::size_t i, Key y);

  EngineConfig cfg_;
  PartitionPlan plan_;
  unsigned plan_retries_ = 0;
  std::vector<Key> reps_;
  std::vector<std::uint64_t> reduced_;
  StaticPredIndex index_;
  std::vector<Bucket> buckets_;
  std::vector<std::uint32_t> counts_;
  std::unique_ptr<DynPredSet> nonempty_;
  std::unique_ptr<DynPredSet> overflow_;
  std::size_t capacity_ = 0;
  std::uint64_t stored_ = 0;
  Phase phase_ = Phase::preprocessing;

  Tally b1_touches_;
  Tally b2_touches_;
  Tally b1_fallbacks_;
  std::uint64_t overflow_events_ = 0;
  std::uint64_t empty_events_ = 0;
  std::uint64_t transfer_events_ = 0;
};

}  // namespace randpred
